#ifndef PESVLAB_ORACLES_COMBINATORICS_HPP
#define PESVLAB_ORACLES_COMBINATORICS_HPP

#include <cmath>
#include <optional>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "../errors.hpp"

namespace pesvlab::oracles {

using BigInt = boost::multiprecision::cpp_int;
using Rational = boost::multiprecision::cpp_rational;

namespace detail {

inline BigInt binomial(unsigned n, unsigned k)
{
    if (k > n) {
        return 0;
    }
    BigInt r = 1;
    for (unsigned i = 1; i <= k; ++i) {
        r = r * (n - k + i) / i;
    }
    return r;
}

inline BigInt power(unsigned base, unsigned e)
{
    BigInt r = 1;
    for (unsigned i = 0; i < e; ++i) {
        r *= base;
    }
    return r;
}

/// Number of surjections from an a-set onto a b-set, by inclusion-exclusion.
inline BigInt surjections(unsigned a, unsigned b)
{
    BigInt total = 0;
    for (unsigned j = 0; j <= b; ++j) {
        BigInt term = binomial(b, j) * power(b - j, a);
        if (j % 2 == 0) {
            total += term;
        } else {
            total -= term;
        }
    }
    return total;
}

inline void check_range(unsigned m, unsigned n)
{
    if (m < 2 || m > n) {
        throw DomainError("combinatoric lemmas need 2 <= m <= n");
    }
}

/// Neumaier-compensated running sum.
class CompensatedSum {
public:
    void add(double v) noexcept
    {
        const double t = sum_ + v;
        if (std::abs(sum_) >= std::abs(v)) {
            comp_ += (sum_ - t) + v;
        } else {
            comp_ += (v - t) + sum_;
        }
        sum_ = t;
    }
    [[nodiscard]] double value() const noexcept { return sum_ + comp_; }

private:
    double sum_{0.0};
    double comp_{0.0};
};

} // namespace detail

struct Lemma1Result {
    Rational lhs1;
    Rational lhs2;
    Rational bound;  // 5/n
    bool pass{false};
};

/// Both sums of the first combinatoric lemma in exact rational arithmetic:
/// lhs1 = m^-n sum_{k=1}^{n} C(n,k) (m-1)^k / k and lhs2 = m^-n sum_{k=0}^{n-1} C(n,k) (m-1)^k / (n-k).
[[nodiscard]] inline Lemma1Result lemma1_exact(unsigned m, unsigned n)
{
    detail::check_range(m, n);
    Rational s1 = 0, s2 = 0;
    for (unsigned k = 0; k <= n; ++k) {
        const BigInt c = detail::binomial(n, k) * detail::power(m - 1, k);
        if (k >= 1) {
            s1 += Rational(c, BigInt(k));
        }
        if (k <= n - 1) {
            s2 += Rational(c, BigInt(n - k));
        }
    }
    const Rational denom(detail::power(m, n));
    Lemma1Result r;
    r.lhs1 = s1 / denom;
    r.lhs2 = s2 / denom;
    r.bound = Rational(5, n);
    r.pass = r.lhs1 <= r.bound && r.lhs2 <= r.bound;
    return r;
}

/// Second lemma's left side by enumerating every composition k_1 + ... + k_m = n with k_i >= 1,
/// in binary64 with compensated summation. Practical for n <= 14.
[[nodiscard]] inline double lemma2_enumerate(unsigned m, unsigned n)
{
    detail::check_range(m, n);
    std::vector<double> factorial(n + 1, 1.0);
    for (unsigned i = 1; i <= n; ++i) {
        factorial[i] = factorial[i - 1] * static_cast<double>(i);
    }
    detail::CompensatedSum sum;
    std::vector<unsigned> parts(m, 1);
    parts[m - 1] = n - (m - 1);
    // Walk compositions in lexicographic order over the first m-1 parts.
    while (true) {
        double multinomial = factorial[n];
        double harmonic = 0.0;
        for (unsigned k : parts) {
            multinomial /= factorial[k];
            harmonic += 1.0 / static_cast<double>(k);
        }
        sum.add(multinomial * harmonic);
        // advance
        int i = static_cast<int>(m) - 2;
        while (i >= 0) {
            if (parts[m - 1] > 1) {
                ++parts[static_cast<unsigned>(i)];
                --parts[m - 1];
                break;
            }
            // reset this position to 1 and carry
            parts[m - 1] += parts[static_cast<unsigned>(i)] - 1;
            parts[static_cast<unsigned>(i)] = 1;
            --i;
        }
        if (i < 0) {
            break;
        }
    }
    return sum.value() / std::pow(static_cast<double>(m), static_cast<double>(n));
}

/// Second lemma's left side through the symmetric reduction
/// (m / m^n) sum_{k_1 >= 1} C(n, k_1) / k_1 * Surj(n - k_1, m - 1), exactly.
[[nodiscard]] inline Rational lemma2_reduction(unsigned m, unsigned n)
{
    detail::check_range(m, n);
    Rational s = 0;
    for (unsigned k1 = 1; k1 + (m - 1) <= n; ++k1) {
        s += Rational(detail::binomial(n, k1) * detail::surjections(n - k1, m - 1), BigInt(k1));
    }
    return s * Rational(BigInt(m), detail::power(m, n));
}

struct Lemma2Result {
    std::optional<double> lhs_enumerated;
    Rational lhs;  // reduction path
    Rational bound;  // 5m/n
    bool pass{false};
    bool paths_agree{true};
    double relative_gap{0.0};
};

/// Second lemma with both computation paths when n is small enough to enumerate.
[[nodiscard]] inline Lemma2Result lemma2_exact(unsigned m, unsigned n, unsigned enumerate_up_to = 14,
                                               double agreement = 1e-12)
{
    detail::check_range(m, n);
    Lemma2Result r;
    r.lhs = lemma2_reduction(m, n);
    r.bound = Rational(5 * m, n);
    r.pass = r.lhs <= r.bound;
    if (n <= enumerate_up_to) {
        const double e = lemma2_enumerate(m, n);
        const double exact = static_cast<double>(r.lhs);
        r.lhs_enumerated = e;
        r.relative_gap = std::abs(e - exact) / std::abs(exact);
        r.paths_agree = r.relative_gap <= agreement;
    }
    return r;
}

} // namespace pesvlab::oracles

#endif // PESVLAB_ORACLES_COMBINATORICS_HPP
