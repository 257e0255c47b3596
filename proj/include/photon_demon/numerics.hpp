#pragma once

#include <cmath>
#include <cstddef>
#include <span>

namespace photon_demon {

// Neumaier-compensated accumulator. Summation order is fixed by the caller,
// so identical inputs always produce identical bits.
class CompensatedSum {
  public:
    void add(double x) noexcept
    {
        const double t = sum_ + x;
        if (std::abs(sum_) >= std::abs(x)) {
            carry_ += (sum_ - t) + x;
        } else {
            carry_ += (x - t) + sum_;
        }
        sum_ = t;
    }

    CompensatedSum& operator+=(double x) noexcept
    {
        add(x);
        return *this;
    }

    [[nodiscard]] double value() const noexcept { return sum_ + carry_; }

  private:
    double sum_ = 0.0;
    double carry_ = 0.0;
};

inline double compensated_sum(std::span<const double> xs) noexcept
{
    CompensatedSum s;
    for (double x : xs) s.add(x);
    return s.value();
}

// Mean and unbiased standard deviation in two passes.
struct MeanSd {
    double mean = 0.0;
    double sd = 0.0;
};

inline MeanSd mean_sd(std::span<const double> xs) noexcept
{
    MeanSd out;
    if (xs.empty()) return out;
    out.mean = compensated_sum(xs) / static_cast<double>(xs.size());
    if (xs.size() < 2) return out;
    CompensatedSum ss;
    for (double x : xs) {
        const double d = x - out.mean;
        ss.add(d * d);
    }
    out.sd = std::sqrt(ss.value() / static_cast<double>(xs.size() - 1));
    return out;
}

}  // namespace photon_demon
