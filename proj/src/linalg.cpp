#include "ddos/linalg.hpp"

#include <algorithm>
#include <limits>
#include <numbers>
#include <string>

#include "ddos/errors.hpp"
#include "ddos/random.hpp"

namespace ddos {

void Matrix::append_row(std::span<const double> r) {
    if (rows_ == 0 && cols_ == 0) {
        cols_ = r.size();
    }
    require_size(r.size(), cols_, "matrix row");
    data_.insert(data_.end(), r.begin(), r.end());
    ++rows_;
}

Matrix from_rows(const std::vector<Vector>& rows) {
    Matrix m;
    for (const auto& r : rows) {
        m.append_row(r);
    }
    return m;
}

bool all_finite(std::span<const double> xs) {
    return std::all_of(xs.begin(), xs.end(), [](double x) { return std::isfinite(x); });
}

void require_size(std::size_t actual, std::size_t expected, std::string_view what) {
    if (actual != expected) {
        throw InputError(std::string(what) + ": expected size " + std::to_string(expected) +
                         ", got " + std::to_string(actual));
    }
}

void require_finite(std::span<const double> xs, std::string_view what) {
    if (!all_finite(xs)) {
        throw NumericError(std::string(what) + ": non-finite value");
    }
}

std::uint64_t Rng::index(std::uint64_t n) {
    // Rejection sampling keeps the result unbiased.
    const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                                std::numeric_limits<std::uint64_t>::max() % n;
    std::uint64_t x = engine_();
    while (x >= limit) {
        x = engine_();
    }
    return x % n;
}

double Rng::normal() {
    if (has_spare_) {
        has_spare_ = false;
        return spare_;
    }
    double u1 = uniform();
    while (u1 <= 0.0) {
        u1 = uniform();
    }
    const double u2 = uniform();
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * std::numbers::pi * u2;
    spare_ = radius * std::sin(angle);
    has_spare_ = true;
    return radius * std::cos(angle);
}

double Rng::exponential(double rate) {
    // 1 - u lies in (0, 1], so the log is finite.
    return -std::log(1.0 - uniform()) / rate;
}

}  // namespace ddos
