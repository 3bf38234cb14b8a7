#pragma once
// Streaming moment accumulator for the Monte Carlo harness: raw power sums
// up to order 6 for one or two statistics plus the cross-product sum.
// Power sums are additive, so merging two accumulators reproduces the
// accumulator of the concatenated stream exactly; the harness fixes a
// deterministic (pairwise) merge tree so results never depend on worker
// scheduling. Central moments are derived from the sums only at report
// time; the statistics here are O(1), so the cancellation in the binomial
// expansion is mild.

#include <array>
#include <cstdint>
#include <vector>

namespace mesormt {

class SampleAccumulator {
  public:
    SampleAccumulator() = default;
    explicit SampleAccumulator(int width); // 1 or 2 statistics

    void add(double x);
    void add(double x, double y);

    // throws on width mismatch; exact componentwise sum otherwise
    static SampleAccumulator merged(const SampleAccumulator& a,
                                    const SampleAccumulator& b);

    int width() const { return width_; }
    int64_t count() const { return count_; }
    // sum of x^order over samples, order in 1..6
    double power_sum(int fn, int order) const;
    double cross_sum() const { return cross_; }

    double mean(int fn) const;
    // (1/n) sum (x - mean)^order, order in 2..6
    double central_moment(int fn, int order) const;
    double sample_variance(int fn) const;  // unbiased, n-1
    double sample_covariance() const;      // unbiased, width 2 only

  private:
    int width_ = 1;
    int64_t count_ = 0;
    std::array<std::array<double, 6>, 2> s_{{{}, {}}};
    double cross_ = 0.0;
};

// Fixed-shape pairwise reduction of per-sample accumulators.
SampleAccumulator tree_merge(std::vector<SampleAccumulator> leaves);

} // namespace mesormt
