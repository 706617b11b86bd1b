#include "elliptic_lab/exact.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace ell::exact {

BigInt::BigInt(long long v) {
    if (v == 0) return;
    sign_ = v > 0 ? 1 : -1;
    unsigned long long m = v > 0 ? static_cast<unsigned long long>(v)
                                 : ~static_cast<unsigned long long>(v) + 1ull;
    while (m != 0) {
        mag_.push_back(static_cast<std::uint32_t>(m & 0xffffffffull));
        m >>= 32;
    }
}

void BigInt::trim() {
    while (!mag_.empty() && mag_.back() == 0) mag_.pop_back();
    if (mag_.empty()) sign_ = 0;
}

int BigInt::cmp_mag(const std::vector<std::uint32_t>& a, const std::vector<std::uint32_t>& b) {
    if (a.size() != b.size()) return a.size() < b.size() ? -1 : 1;
    for (std::size_t i = a.size(); i-- > 0;)
        if (a[i] != b[i]) return a[i] < b[i] ? -1 : 1;
    return 0;
}

std::vector<std::uint32_t> BigInt::add_mag(const std::vector<std::uint32_t>& a,
                                           const std::vector<std::uint32_t>& b) {
    std::vector<std::uint32_t> out;
    out.reserve(std::max(a.size(), b.size()) + 1);
    std::uint64_t carry = 0;
    for (std::size_t i = 0; i < std::max(a.size(), b.size()); ++i) {
        std::uint64_t s = carry;
        if (i < a.size()) s += a[i];
        if (i < b.size()) s += b[i];
        out.push_back(static_cast<std::uint32_t>(s & 0xffffffffull));
        carry = s >> 32;
    }
    if (carry) out.push_back(static_cast<std::uint32_t>(carry));
    return out;
}

// Requires |a| >= |b|.
std::vector<std::uint32_t> BigInt::sub_mag(const std::vector<std::uint32_t>& a,
                                           const std::vector<std::uint32_t>& b) {
    std::vector<std::uint32_t> out;
    out.reserve(a.size());
    std::int64_t borrow = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        std::int64_t d = static_cast<std::int64_t>(a[i]) - borrow;
        if (i < b.size()) d -= b[i];
        if (d < 0) {
            d += (1ll << 32);
            borrow = 1;
        } else {
            borrow = 0;
        }
        out.push_back(static_cast<std::uint32_t>(d));
    }
    return out;
}

BigInt BigInt::operator+(const BigInt& o) const {
    if (sign_ == 0) return o;
    if (o.sign_ == 0) return *this;
    BigInt r;
    if (sign_ == o.sign_) {
        r.sign_ = sign_;
        r.mag_ = add_mag(mag_, o.mag_);
    } else {
        const int c = cmp_mag(mag_, o.mag_);
        if (c == 0) return BigInt();
        if (c > 0) {
            r.sign_ = sign_;
            r.mag_ = sub_mag(mag_, o.mag_);
        } else {
            r.sign_ = o.sign_;
            r.mag_ = sub_mag(o.mag_, mag_);
        }
    }
    r.trim();
    return r;
}

BigInt BigInt::operator-() const {
    BigInt r = *this;
    r.sign_ = -r.sign_;
    return r;
}

BigInt BigInt::operator-(const BigInt& o) const { return *this + (-o); }

BigInt BigInt::operator*(const BigInt& o) const {
    if (sign_ == 0 || o.sign_ == 0) return BigInt();
    BigInt r;
    r.sign_ = sign_ * o.sign_;
    r.mag_.assign(mag_.size() + o.mag_.size(), 0);
    for (std::size_t i = 0; i < mag_.size(); ++i) {
        std::uint64_t carry = 0;
        for (std::size_t j = 0; j < o.mag_.size(); ++j) {
            const std::uint64_t cur = static_cast<std::uint64_t>(mag_[i]) * o.mag_[j] +
                                      r.mag_[i + j] + carry;
            r.mag_[i + j] = static_cast<std::uint32_t>(cur & 0xffffffffull);
            carry = cur >> 32;
        }
        std::size_t k = i + o.mag_.size();
        while (carry) {
            const std::uint64_t cur = r.mag_[k] + carry;
            r.mag_[k] = static_cast<std::uint32_t>(cur & 0xffffffffull);
            carry = cur >> 32;
            ++k;
        }
    }
    r.trim();
    return r;
}

BigInt BigInt::shifted_left(int bits) const {
    if (sign_ == 0 || bits == 0) return *this;
    if (bits < 0) throw std::invalid_argument("shifted_left: negative shift");
    BigInt r;
    r.sign_ = sign_;
    const int words = bits / 32, rem = bits % 32;
    r.mag_.assign(mag_.size() + words + 1, 0);
    for (std::size_t i = 0; i < mag_.size(); ++i) {
        const std::uint64_t v = static_cast<std::uint64_t>(mag_[i]) << rem;
        r.mag_[i + words] |= static_cast<std::uint32_t>(v & 0xffffffffull);
        r.mag_[i + words + 1] |= static_cast<std::uint32_t>(v >> 32);
    }
    r.trim();
    return r;
}

BigInt BigInt::from_scaled_double(double x, int shift) {
    if (x == 0.0) return BigInt();
    if (!std::isfinite(x)) throw std::invalid_argument("from_scaled_double: non-finite");
    int e = 0;
    const double fr = std::frexp(x, &e);  // x = fr * 2^e, 0.5 <= |fr| < 1
    const long long mant = static_cast<long long>(std::ldexp(fr, 53));
    const int extra = shift + e - 53;
    if (extra < 0) {
        // Strip trailing zero bits of the mantissa to absorb the deficit.
        long long m = mant;
        int tz = 0;
        while (m % 2 == 0 && tz < -extra) {
            m /= 2;
            ++tz;
        }
        if (tz < -extra)
            throw std::invalid_argument("from_scaled_double: value not integral at this shift");
        return BigInt(m);
    }
    return BigInt(mant).shifted_left(extra);
}

double BigInt::to_double() const {
    double v = 0.0;
    for (std::size_t i = mag_.size(); i-- > 0;) v = v * 4294967296.0 + mag_[i];
    return sign_ < 0 ? -v : v;
}

std::string BigInt::to_string() const {
    if (sign_ == 0) return "0";
    std::vector<std::uint32_t> work = mag_;
    std::string digits;
    while (!work.empty()) {
        std::uint64_t rem = 0;
        for (std::size_t i = work.size(); i-- > 0;) {
            const std::uint64_t cur = (rem << 32) | work[i];
            work[i] = static_cast<std::uint32_t>(cur / 1000000000ull);
            rem = cur % 1000000000ull;
        }
        while (!work.empty() && work.back() == 0) work.pop_back();
        for (int k = 0; k < 9; ++k) {
            digits.push_back(static_cast<char>('0' + rem % 10));
            rem /= 10;
        }
    }
    while (digits.size() > 1 && digits.back() == '0') digits.pop_back();
    if (sign_ < 0) digits.push_back('-');
    std::reverse(digits.begin(), digits.end());
    return digits;
}

GaussInt det(const GaussMat& m) {
    const int n = static_cast<int>(m.size());
    if (n == 0) return GaussInt(1, 0);
    if (n > 24) throw std::invalid_argument("det: dimension too large for subset DP");
    // g[mask] = det of the top-popcount(mask) rows restricted to columns in mask.
    std::vector<GaussInt> g(std::size_t(1) << n);
    g[0] = GaussInt(1, 0);
    for (std::uint32_t mask = 1; mask < (1u << n); ++mask) {
        const int row = __builtin_popcount(mask) - 1;
        GaussInt acc(0, 0);
        int pos = 0;
        for (int col = 0; col < n; ++col) {
            if (!(mask & (1u << col))) continue;
            const GaussInt term = m[static_cast<std::size_t>(row)][static_cast<std::size_t>(col)] *
                                  g[mask ^ (1u << col)];
            // Laplace along the last included row: sign (-1)^{row + pos}.
            acc = ((row + pos) % 2 == 0) ? acc + term : acc - term;
            ++pos;
        }
        g[mask] = acc;
    }
    return g[(std::size_t(1) << n) - 1];
}

GaussMat minor_of(const GaussMat& m, int r, int c) {
    GaussMat out;
    out.reserve(m.size() - 1);
    for (int i = 0; i < static_cast<int>(m.size()); ++i) {
        if (i == r) continue;
        std::vector<GaussInt> row;
        row.reserve(m.size() - 1);
        for (int j = 0; j < static_cast<int>(m.size()); ++j) {
            if (j == c) continue;
            row.push_back(m[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)]);
        }
        out.push_back(std::move(row));
    }
    return out;
}

int common_dyadic_shift(const std::vector<std::complex<double>>& values) {
    int needed = 0;
    auto consider = [&](double x) {
        if (x == 0.0) return;
        int e = 0;
        const double fr = std::frexp(x, &e);
        long long mant = static_cast<long long>(std::ldexp(fr, 53));
        int tz = 0;
        while (mant % 2 == 0) {
            mant /= 2;
            ++tz;
        }
        // x = mant * 2^(e - 53 + tz); integral once shifted by the deficit.
        needed = std::max(needed, -(e - 53 + tz));
    };
    for (const auto& v : values) {
        consider(v.real());
        consider(v.imag());
    }
    return needed;
}

}  // namespace ell::exact
