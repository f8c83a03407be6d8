#pragma once

#include <string>

#include "fairgap/dataset.hpp"

namespace fairgap::testing {

inline Record proxy_record(int age, std::string race, int outcome, int priors = 0) {
  Record r;
  r.age = age;
  r.race = std::move(race);
  r.outcome = outcome;
  r.priors_count = priors;
  r.days_b_screening_arrest = 0;
  return r;
}

// Ages split by race and ages split by recidivism form the same two multisets,
// through different rows, so both conditional distances agree exactly.
inline RecordTable constructed_equality_table() {
  RecordTable t;
  for (int age : {20, 30, 33}) {
    t.records.push_back(proxy_record(age, "African-American", 0));
    t.records.push_back(proxy_record(age, "Caucasian", 1));
  }
  for (int age : {25, 35, 40, 22}) t.records.push_back(proxy_record(age, "Caucasian", 0));
  return t;
}

// Four rows per recidivism side; priors_count doubles as the outcome indicator.
inline RecordTable perfect_separation_table() {
  RecordTable t;
  for (int i = 0; i < 8; ++i) {
    const int y = i % 2;
    t.records.push_back(proxy_record(20 + i, i < 4 ? "African-American" : "Caucasian", y, y));
  }
  return t;
}

}  // namespace fairgap::testing
