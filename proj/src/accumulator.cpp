#include "mesormt/accumulator.hpp"

#include <cmath>

#include "mesormt/errors.hpp"

namespace mesormt {

SampleAccumulator::SampleAccumulator(int width) : width_(width) {
    if (width != 1 && width != 2)
        throw ParameterError("accumulator width must be 1 or 2");
}

void SampleAccumulator::add(double x) {
    if (width_ != 1) throw ParameterError("accumulator expects pairs");
    double p = 1.0;
    for (int k = 0; k < 6; ++k) {
        p *= x;
        s_[0][k] += p;
    }
    ++count_;
}

void SampleAccumulator::add(double x, double y) {
    if (width_ != 2) throw ParameterError("accumulator expects scalars");
    double p = 1.0, q = 1.0;
    for (int k = 0; k < 6; ++k) {
        p *= x;
        q *= y;
        s_[0][k] += p;
        s_[1][k] += q;
    }
    cross_ += x * y;
    ++count_;
}

SampleAccumulator SampleAccumulator::merged(const SampleAccumulator& a,
                                            const SampleAccumulator& b) {
    if (a.width_ != b.width_)
        throw ParameterError("cannot merge accumulators of different widths");
    SampleAccumulator out(a.width_);
    out.count_ = a.count_ + b.count_;
    for (int f = 0; f < 2; ++f)
        for (int k = 0; k < 6; ++k) out.s_[f][k] = a.s_[f][k] + b.s_[f][k];
    out.cross_ = a.cross_ + b.cross_;
    return out;
}

double SampleAccumulator::power_sum(int fn, int order) const {
    if (fn < 0 || fn >= width_ || order < 1 || order > 6)
        throw ParameterError("power sum index out of range");
    return s_[fn][order - 1];
}

double SampleAccumulator::mean(int fn) const {
    if (count_ == 0) throw ParameterError("empty accumulator");
    return power_sum(fn, 1) / double(count_);
}

double SampleAccumulator::central_moment(int fn, int order) const {
    if (order < 2 || order > 6)
        throw ParameterError("central moment order must be in 2..6");
    const double n = double(count_);
    const double mu = mean(fn);
    // binomial expansion around the mean; S_0 = n
    double acc = std::pow(-mu, order) * n;
    double binom = 1.0;
    for (int j = 1; j <= order; ++j) {
        binom = binom * (order - j + 1) / j;
        acc += binom * power_sum(fn, j) * std::pow(-mu, order - j);
    }
    return acc / n;
}

double SampleAccumulator::sample_variance(int fn) const {
    if (count_ < 2) throw ParameterError("variance needs at least 2 samples");
    const double n = double(count_);
    return (power_sum(fn, 2) - n * mean(fn) * mean(fn)) / (n - 1.0);
}

double SampleAccumulator::sample_covariance() const {
    if (width_ != 2) throw ParameterError("covariance needs width 2");
    if (count_ < 2) throw ParameterError("covariance needs at least 2 samples");
    const double n = double(count_);
    return (cross_ - n * mean(0) * mean(1)) / (n - 1.0);
}

SampleAccumulator tree_merge(std::vector<SampleAccumulator> leaves) {
    if (leaves.empty()) return SampleAccumulator();
    while (leaves.size() > 1) {
        std::vector<SampleAccumulator> next;
        next.reserve((leaves.size() + 1) / 2);
        for (size_t i = 0; i + 1 < leaves.size(); i += 2)
            next.push_back(SampleAccumulator::merged(leaves[i], leaves[i + 1]));
        if (leaves.size() % 2 == 1) next.push_back(leaves.back());
        leaves = std::move(next);
    }
    return leaves[0];
}

} // namespace mesormt
