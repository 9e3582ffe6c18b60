#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace heavytail {

// Bad arguments or model states the caller could have checked. CLI exit code 1.
struct validation_error : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// Parameter combinations outside the implemented model family. CLI exit code 1.
struct unsupported_model_error : validation_error {
    using validation_error::validation_error;
};

// Requests that exceed a documented size cap. CLI exit code 2.
struct capacity_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// k-th largest entry of x, 1-indexed: order_stat(x, 1) is the maximum.
inline double order_stat(std::vector<double> x, int k) {
    if (x.empty()) throw validation_error("order_stat: empty vector");
    if (k < 1 || k > static_cast<int>(x.size()))
        throw validation_error("order_stat: k out of range");
    std::nth_element(x.begin(), x.begin() + (k - 1), x.end(), std::greater<double>());
    return x[k - 1];
}

// Shortest decimal string that parses back to exactly the same double.
// Locale-independent: '.' decimal point always.
inline std::string format_double(double v) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

// Value of a positively homogeneous functional: a finite number or the symbolic
// point at infinity. Never a floating sentinel; callers must branch explicitly.
class TauValue {
  public:
    static TauValue finite(double v) {
        if (!(v >= 0.0) || !std::isfinite(v))
            throw validation_error("TauValue: finite value must be a finite number >= 0");
        return TauValue(true, v);
    }
    static TauValue infinite() { return TauValue(false, 0.0); }

    bool is_finite() const { return finite_; }
    double value() const {
        if (!finite_) throw validation_error("TauValue: no finite value, check is_finite first");
        return value_;
    }
    // Rendering used by every CSV/report writer: finite values print as numbers.
    std::string str() const;

    friend bool operator==(const TauValue& a, const TauValue& b) {
        return a.finite_ == b.finite_ && (!a.finite_ || a.value_ == b.value_);
    }

  private:
    TauValue(bool f, double v) : finite_(f), value_(v) {}
    bool finite_;
    double value_;
};

inline std::string TauValue::str() const { return finite_ ? format_double(value_) : "INF"; }

// Dense row-major matrix with q rows (outputs) and d columns (inputs).
template <class S>
struct Mat {
    int q = 0;
    int d = 0;
    std::vector<S> a;

    Mat() = default;
    Mat(int q_, int d_) : q(q_), d(d_), a(static_cast<std::size_t>(q_) * d_, S(0)) {
        if (q_ <= 0 || d_ <= 0) throw validation_error("Mat: dimensions must be positive");
    }
    Mat(int q_, int d_, std::vector<S> entries) : q(q_), d(d_), a(std::move(entries)) {
        if (q_ <= 0 || d_ <= 0) throw validation_error("Mat: dimensions must be positive");
        if (a.size() != static_cast<std::size_t>(q_) * d_)
            throw validation_error("Mat: entry count does not match q * d");
    }
    S& operator()(int r, int c) { return a[static_cast<std::size_t>(r) * d + c]; }
    const S& operator()(int r, int c) const { return a[static_cast<std::size_t>(r) * d + c]; }
};

using Matrix = Mat<double>;

// y = A x.
inline std::vector<double> matvec(const Matrix& m, const std::vector<double>& x) {
    if (static_cast<int>(x.size()) != m.d) throw validation_error("apply: size mismatch");
    std::vector<double> y(m.q, 0.0);
    for (int r = 0; r < m.q; ++r) {
        double s = 0.0;
        for (int c = 0; c < m.d; ++c) s += m(r, c) * x[c];
        y[r] = s;
    }
    return y;
}

// Visit every subset of {0..n-1} with size in [lo, hi], as a sorted index vector.
template <class F>
void for_each_subset(int n, int lo, int hi, F&& visit) {
    std::vector<int> pick;
    auto rec = [&](auto&& self, int next) -> void {
        if (static_cast<int>(pick.size()) >= lo) visit(const_cast<const std::vector<int>&>(pick));
        if (static_cast<int>(pick.size()) == hi) return;
        for (int j = next; j < n; ++j) {
            pick.push_back(j);
            self(self, j + 1);
            pick.pop_back();
        }
    };
    if (lo <= hi && hi >= 0) rec(rec, 0);
}

inline std::uint64_t binom(int n, int k) {
    if (k < 0 || k > n) return 0;
    k = std::min(k, n - k);
    std::uint64_t r = 1;
    for (int j = 1; j <= k; ++j) r = r * static_cast<std::uint64_t>(n - k + j) / j;
    return r;
}

}  // namespace heavytail
