#pragma once

#include <cmath>
#include <span>
#include <vector>

namespace vaxsim {

struct Summary {
    std::size_t n = 0;
    double mean = 0.0;
    double sd = 0.0;    ///< sample standard deviation (n - 1 denominator)
    double ci95 = 0.0;  ///< 1.96 * sd / sqrt(n)
};

/// Two-pass mean and variance over the values in the given order.
template <class T>
Summary summarize(std::span<const T> values) {
    Summary s;
    s.n = values.size();
    if (s.n == 0) return s;
    double sum = 0.0;
    for (const auto& v : values) sum += static_cast<double>(v);
    s.mean = sum / static_cast<double>(s.n);
    if (s.n > 1) {
        double ss = 0.0;
        for (const auto& v : values) {
            const double d = static_cast<double>(v) - s.mean;
            ss += d * d;
        }
        s.sd = std::sqrt(ss / static_cast<double>(s.n - 1));
        s.ci95 = 1.96 * s.sd / std::sqrt(static_cast<double>(s.n));
    }
    return s;
}

template <class T>
Summary summarize(const std::vector<T>& values) {
    return summarize(std::span<const T>(values));
}

}  // namespace vaxsim
