#pragma once

#include <complex>
#include <cstdint>
#include <string>
#include <vector>

namespace ell::exact {

// Sign-magnitude big integer, base 2^32. Supports +, -, *, shifts: everything
// a division-free determinant needs.
class BigInt {
public:
    BigInt() = default;
    BigInt(long long v);

    // x * 2^shift, which must be an integer (x is a dyadic rational).
    static BigInt from_scaled_double(double x, int shift);

    BigInt operator+(const BigInt& o) const;
    BigInt operator-(const BigInt& o) const;
    BigInt operator*(const BigInt& o) const;
    BigInt operator-() const;
    BigInt shifted_left(int bits) const;

    bool is_zero() const { return sign_ == 0; }
    bool operator==(const BigInt& o) const { return sign_ == o.sign_ && mag_ == o.mag_; }
    double to_double() const;
    std::string to_string() const;  // decimal

private:
    static int cmp_mag(const std::vector<std::uint32_t>& a, const std::vector<std::uint32_t>& b);
    static std::vector<std::uint32_t> add_mag(const std::vector<std::uint32_t>& a,
                                              const std::vector<std::uint32_t>& b);
    static std::vector<std::uint32_t> sub_mag(const std::vector<std::uint32_t>& a,
                                              const std::vector<std::uint32_t>& b);
    void trim();

    int sign_ = 0;                      // -1, 0, +1
    std::vector<std::uint32_t> mag_;    // little-endian, no leading zeros
};

struct GaussInt {
    BigInt re, im;

    GaussInt() = default;
    GaussInt(BigInt r, BigInt i) : re(std::move(r)), im(std::move(i)) {}
    GaussInt(long long r, long long i = 0) : re(r), im(i) {}

    GaussInt operator+(const GaussInt& o) const { return {re + o.re, im + o.im}; }
    GaussInt operator-(const GaussInt& o) const { return {re - o.re, im - o.im}; }
    GaussInt operator*(const GaussInt& o) const {
        return {re * o.re - im * o.im, re * o.im + im * o.re};
    }
    GaussInt operator-() const { return {-re, -im}; }
    bool is_zero() const { return re.is_zero() && im.is_zero(); }
    std::complex<double> to_complex() const { return {re.to_double(), im.to_double()}; }
};

using GaussMat = std::vector<std::vector<GaussInt>>;

// Determinant by division-free subset DP over column masks; n <= ~20.
GaussInt det(const GaussMat& m);

// Minor with row r and column c removed.
GaussMat minor_of(const GaussMat& m, int r, int c);

// Smallest shift K such that every entry of A times 2^K is an integer.
int common_dyadic_shift(const std::vector<std::complex<double>>& values);

}  // namespace ell::exact
