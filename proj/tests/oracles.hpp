#pragma once

// Brute-force reference computations used as independent oracles. Nothing
// here calls into the library's numerical code.

#include <cmath>
#include <cstddef>
#include <vector>

#include "ddos/linalg.hpp"
#include "ddos/rbm.hpp"

namespace oracle {

inline double logistic(double x) { return 1.0 / (1.0 + std::exp(-x)); }

inline double energy_bb(const ddos::RbmParams& p, const std::vector<double>& v, const std::vector<double>& h) {
    double e = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i)
        for (std::size_t j = 0; j < h.size(); ++j) e -= p.w(i, j) * v[i] * h[j];
    for (std::size_t i = 0; i < v.size(); ++i) e -= p.b[i] * v[i];
    for (std::size_t j = 0; j < h.size(); ++j) e -= p.a[j] * h[j];
    return e;
}

inline double energy_gb(const ddos::RbmParams& p, const std::vector<double>& v, const std::vector<double>& h) {
    double e = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i)
        for (std::size_t j = 0; j < h.size(); ++j) e -= p.w(i, j) * v[i] * h[j];
    for (std::size_t i = 0; i < v.size(); ++i) e += 0.5 * (v[i] - p.b[i]) * (v[i] - p.b[i]);
    for (std::size_t j = 0; j < h.size(); ++j) e -= p.a[j] * h[j];
    return e;
}

inline std::vector<double> bits(unsigned mask, std::size_t n) {
    std::vector<double> out(n);
    for (std::size_t k = 0; k < n; ++k) out[k] = (mask >> k) & 1u ? 1.0 : 0.0;
    return out;
}

// Full joint distribution exp(-E)/Z over every (v, h) in {0,1}^(V+H).
struct Joint {
    std::size_t V = 0, H = 0;
    std::vector<double> prob;  // index = vmask | (hmask << V)
};

inline Joint enumerate_joint(const ddos::RbmParams& p) {
    Joint j{p.b.size(), p.a.size(), {}};
    const unsigned n = 1u << (j.V + j.H);
    j.prob.resize(n);
    double z = 0.0;
    for (unsigned m = 0; m < n; ++m) {
        j.prob[m] = std::exp(-energy_bb(p, bits(m, j.V), bits(m >> j.V, j.H)));
        z += j.prob[m];
    }
    for (double& x : j.prob) x /= z;
    return j;
}

// p(h_k = 1 | v = vmask) from the joint table.
inline std::vector<double> hidden_conditional(const Joint& j, unsigned vmask) {
    std::vector<double> num(j.H, 0.0);
    double marginal = 0.0;
    for (unsigned hm = 0; hm < (1u << j.H); ++hm) {
        const double pr = j.prob[vmask | (hm << j.V)];
        marginal += pr;
        for (std::size_t k = 0; k < j.H; ++k) num[k] += (hm >> k) & 1u ? pr : 0.0;
    }
    for (double& x : num) x /= marginal;
    return num;
}

// p(v_i = 1 | h = hmask) from the joint table.
inline std::vector<double> visible_conditional(const Joint& j, unsigned hmask) {
    std::vector<double> num(j.V, 0.0);
    double marginal = 0.0;
    for (unsigned vm = 0; vm < (1u << j.V); ++vm) {
        const double pr = j.prob[vm | (hmask << j.V)];
        marginal += pr;
        for (std::size_t i = 0; i < j.V; ++i) num[i] += (vm >> i) & 1u ? pr : 0.0;
    }
    for (double& x : num) x /= marginal;
    return num;
}

inline double mse(const std::vector<std::vector<double>>& a, const std::vector<std::vector<double>>& b) {
    double s = 0.0;
    std::size_t n = 0;
    for (std::size_t t = 0; t < a.size(); ++t)
        for (std::size_t d = 0; d < a[t].size(); ++d, ++n) s += (a[t][d] - b[t][d]) * (a[t][d] - b[t][d]);
    return s / static_cast<double>(n);
}

inline void mean_std(const std::vector<double>& xs, double& mean, double& sd) {
    mean = 0.0;
    for (double x : xs) mean += x;
    mean /= static_cast<double>(xs.size());
    double v = 0.0;
    for (double x : xs) v += (x - mean) * (x - mean);
    sd = std::sqrt(v / static_cast<double>(xs.size()));
}

}  // namespace oracle
