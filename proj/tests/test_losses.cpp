#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "fairgap/error.hpp"
#include "fairgap/losses.hpp"
#include "support/oracles.hpp"

using namespace fairgap;

namespace {

struct Batch {
  std::vector<double> logits;
  std::vector<double> probs;
  std::vector<int> labels;
  std::vector<int> groups;
};

// Random batch with both labels and both groups present.
Batch random_batch(std::mt19937_64& rng, std::size_t n, double spread = 2.0) {
  std::normal_distribution<double> z(0.0, spread);
  std::bernoulli_distribution coin;
  Batch b;
  for (std::size_t k = 0; k < n; ++k) {
    b.logits.push_back(z(rng));
    b.labels.push_back(k < 2 ? static_cast<int>(k) : coin(rng));
    b.groups.push_back(k == 0 || k == 3 ? 0 : (k == 1 || k == 2 ? 1 : coin(rng)));
  }
  for (double l : b.logits) b.probs.push_back(1.0 / (1.0 + std::exp(-l)));
  return b;
}

std::vector<double> probs_of(const std::vector<double>& logits) {
  std::vector<double> p;
  for (double l : logits) p.push_back(sigmoid(l));
  return p;
}

}  // namespace

TEST_CASE("bce") {
  const std::vector<int> y{1, 0, 1};
  CHECK(bce(std::vector<double>{1.0, 0.0, 1.0}, y) <= 1e-11);
  CHECK(bce(std::vector<double>{0.5}, std::vector<int>{1}) ==
        doctest::Approx(std::log(2.0)).epsilon(1e-15));
  CHECK(bce(std::vector<double>{0.9, 0.2}, std::vector<int>{1, 0}) ==
        doctest::Approx(0.164252).epsilon(1e-6));
  CHECK(bce(std::vector<double>{0.9, 0.2}, std::vector<int>{1, 0}) ==
        doctest::Approx(-(std::log(0.9) + std::log(0.8)) / 2).epsilon(1e-15));
  CHECK(std::isfinite(bce(std::vector<double>{0.0}, std::vector<int>{1})));
  CHECK_THROWS_AS(bce(std::vector<double>{}, std::vector<int>{}), Error);
}

TEST_CASE("class_weights") {
  const auto balanced = class_weights(std::vector<int>{0, 1, 1, 0});
  CHECK(balanced.w0 == 1.0);
  CHECK(balanced.w1 == 1.0);
  const auto skew = class_weights(std::vector<int>{0, 0, 0, 1});
  CHECK(skew.w0 == doctest::Approx(4.0 / 6.0).epsilon(1e-15));
  CHECK(skew.w1 == 2.0);
  try {
    class_weights(std::vector<int>{1, 1, 1, 1});
    FAIL("expected degenerate labels");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::kDegenerateLabels);
  }
  std::mt19937_64 rng(4);
  for (int t = 0; t < 50; ++t) {
    const auto b = random_batch(rng, 37);
    const auto w = class_weights(b.labels);
    CHECK(w.w0 > 0);
    CHECK(w.w1 > 0);
    double mean = 0;
    for (int y : b.labels) mean += w.of(y);
    CHECK(mean / 37 == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("wbce") {
  const std::vector<double> p{0.9, 0.2};
  const std::vector<int> y{1, 0};
  CHECK(wbce(p, y, {0.5, 2.0}) == doctest::Approx(0.161146).epsilon(1e-6));
  CHECK(wbce(p, y, {0.5, 2.0}) ==
        doctest::Approx(-(2 * std::log(0.9) + 0.5 * std::log(0.8)) / 2).epsilon(1e-15));
  CHECK(wbce(p, y, {1.0, 3.0}) * 2 == doctest::Approx(wbce(p, y, {2.0, 6.0})).epsilon(1e-15));
}

TEST_CASE("group_ce") {
  SUBCASE("worked example") {
    const auto ce = group_ce(std::vector<double>{0.9, 0.5}, std::vector<int>{1, 1},
                             std::vector<int>{0, 1}, 2, {1, 1});
    CHECK(ce[0] == doctest::Approx(0.105360).epsilon(1e-5));
    CHECK(ce[1] == doctest::Approx(0.693147).epsilon(1e-6));
  }
  SUBCASE("single group equals batch wbce") {
    std::mt19937_64 rng(8);
    auto b = random_batch(rng, 20);
    std::fill(b.groups.begin(), b.groups.end(), 0);
    const auto w = class_weights(b.labels);
    CHECK(group_ce(b.probs, b.labels, b.groups, 1, w)[0] == wbce(b.probs, b.labels, w));
  }
  SUBCASE("identical multisets give equal entries") {
    const std::vector<double> p{0.3, 0.8, 0.8, 0.3};
    const auto ce = group_ce(p, std::vector<int>{0, 1, 1, 0}, std::vector<int>{0, 0, 1, 1}, 2, {1, 1});
    CHECK(ce[0] == ce[1]);
  }
  SUBCASE("absent group") {
    try {
      group_ce(std::vector<double>{0.5}, std::vector<int>{1}, std::vector<int>{0}, 2, {1, 1});
      FAIL("expected degenerate group");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::kDegenerateGroup);
    }
  }
}

TEST_CASE("gap_loss") {
  const std::vector<double> p{0.9, 0.5};
  const std::vector<int> y{1, 1}, g{0, 1};
  SUBCASE("worked example with lambda 1") {
    const auto l = gap_loss(p, y, g, 2, 1.0, {1, 1});
    CHECK(l.penalty == doctest::Approx(0.690987).epsilon(1e-6));
    CHECK(l.overall_error == doctest::Approx(0.399254).epsilon(1e-6));
    CHECK(l.total == doctest::Approx(1.090241).epsilon(1e-6));
    const double d = std::log(0.9) - std::log(0.5);
    CHECK(l.penalty == doctest::Approx(2 * d * d).epsilon(1e-14));
  }
  SUBCASE("lambda 0 is the batch wbce") {
    const auto l = gap_loss(p, y, g, 2, 0.0, {1, 1});
    CHECK(l.total == wbce(p, y, {1, 1}));
  }
  SUBCASE("parity means no penalty") {
    const std::vector<double> q{0.3, 0.8, 0.8, 0.3};
    const auto l = gap_loss(q, std::vector<int>{0, 1, 1, 0}, std::vector<int>{0, 0, 1, 1}, 2, 5.0, {1, 1});
    CHECK(l.penalty == 0.0);
    CHECK(l.total == l.overall_error);
  }
  SUBCASE("group-mean overall error") {
    const auto l = gap_loss(p, y, g, 2, 0.0, {1, 1}, OverallError::kGroupMean);
    CHECK(l.overall_error == doctest::Approx((l.per_group_ce[0] + l.per_group_ce[1]) / 2));
  }
  SUBCASE("three groups count each unordered pair twice") {
    const auto l = gap_loss(std::vector<double>{0.9, 0.5, 0.2}, std::vector<int>{1, 1, 1},
                            std::vector<int>{0, 1, 2}, 3, 1.0, {1, 1});
    const auto& c = l.per_group_ce;
    const double unordered = std::pow(c[0] - c[1], 2) + std::pow(c[0] - c[2], 2) + std::pow(c[1] - c[2], 2);
    CHECK(l.penalty == doctest::Approx(2 * unordered).epsilon(1e-14));
  }
  SUBCASE("negative lambda is rejected") {
    CHECK_THROWS_AS(gap_loss(p, y, g, 2, -1.0, {1, 1}), Error);
  }
}

TEST_CASE("loss properties on random batches") {
  std::mt19937_64 rng(17);
  for (int t = 0; t < 200; ++t) {
    const auto b = random_batch(rng, 4 + t % 61);
    const auto w = class_weights(b.labels);
    const double lambda = std::array{0.0, 0.1, 1.0, 10.0}[t % 4];
    const auto l = gap_loss(b.probs, b.labels, b.groups, 2, lambda, w);
    CHECK(l.overall_error >= 0);
    CHECK(l.penalty >= 0);
    CHECK(l.total >= l.overall_error);
    CHECK(std::abs(l.total - (l.overall_error + lambda * l.penalty)) <= 1e-12);

    // Reduction chain.
    CHECK(std::abs(gap_loss(b.probs, b.labels, b.groups, 2, 0.0, w).total - wbce(b.probs, b.labels, w)) <= 1e-15);
    CHECK(std::abs(wbce(b.probs, b.labels, {1, 1}) - bce(b.probs, b.labels)) <= 1e-15);

    // Joint permutation.
    std::vector<std::size_t> order(b.labels.size());
    std::iota(order.begin(), order.end(), 0);
    std::shuffle(order.begin(), order.end(), rng);
    Batch s;
    for (auto i : order) {
      s.probs.push_back(b.probs[i]);
      s.labels.push_back(b.labels[i]);
      s.groups.push_back(b.groups[i]);
    }
    const auto ls = gap_loss(s.probs, s.labels, s.groups, 2, lambda, w);
    CHECK(std::abs(ls.total - l.total) <= 1e-15 * std::max(1.0, l.total));
    CHECK(std::abs(ls.overall_error - l.overall_error) <= 1e-15 * std::max(1.0, l.overall_error));

    // Relabelling the groups.
    std::vector<int> swapped(b.groups);
    for (int& g : swapped) g = 1 - g;
    const auto lr = gap_loss(b.probs, b.labels, swapped, 2, lambda, w);
    CHECK(lr.penalty == l.penalty);
    CHECK(lr.total == l.total);
  }
}

TEST_CASE("gradients") {
  SUBCASE("lambda 0 with unit weights is (p - y) / n") {
    std::mt19937_64 rng(21);
    const auto b = random_batch(rng, 12);
    const auto grad = gap_gradient(b.logits, b.labels, b.groups, 2, 0.0, {1, 1});
    for (std::size_t k = 0; k < grad.size(); ++k)
      CHECK(grad[k] == doctest::Approx((sigmoid(b.logits[k]) - b.labels[k]) / 12.0).epsilon(1e-14));
  }
  SUBCASE("penalty gradient vanishes at parity") {
    const std::vector<double> logits{-0.8, 1.4, 1.4, -0.8};
    const std::vector<int> y{0, 1, 1, 0}, g{0, 0, 1, 1};
    const auto gap = gap_gradient(logits, y, g, 2, 3.0, {1, 1});
    const auto plain = wbce_gradient(logits, y, {1, 1});
    for (std::size_t k = 0; k < 4; ++k) CHECK(gap[k] == doctest::Approx(plain[k]).epsilon(1e-15));
  }
  SUBCASE("finite differences, seeded n=8 instance") {
    std::mt19937_64 rng(8);
    const auto b = random_batch(rng, 8);
    const auto w = class_weights(b.labels);
    const auto grad = gap_gradient(b.logits, b.labels, b.groups, 2, 0.5, w);
    const auto numeric = oracle::numeric_gradient(
        [&](const std::vector<double>& z) { return gap_loss(probs_of(z), b.labels, b.groups, 2, 0.5, w).total; },
        b.logits);
    for (std::size_t k = 0; k < 8; ++k) CHECK(oracle::relative_error(grad[k], numeric[k]) < 1e-5);
  }
  SUBCASE("finite differences, group-mean overall error and three groups") {
    std::mt19937_64 rng(31);
    for (int t = 0; t < 40; ++t) {
      auto b = random_batch(rng, 9 + t);
      for (std::size_t k = 0; k < b.groups.size(); ++k) b.groups[k] = static_cast<int>(k % 3);
      const auto w = class_weights(b.labels);
      const double lambda = t % 2 ? 1.0 : 0.1;
      const auto grad = gap_gradient(b.logits, b.labels, b.groups, 3, lambda, w, OverallError::kGroupMean);
      const auto numeric = oracle::numeric_gradient(
          [&](const std::vector<double>& z) {
            return gap_loss(probs_of(z), b.labels, b.groups, 3, lambda, w, OverallError::kGroupMean).total;
          },
          b.logits);
      for (std::size_t k = 0; k < grad.size(); ++k)
        CHECK(oracle::relative_error(grad[k], numeric[k]) < 1e-5);
    }
  }
}
