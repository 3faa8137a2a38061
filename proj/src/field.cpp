#include "ame/field.hpp"

#include <algorithm>
#include <cassert>
#include <string>

namespace ame {

namespace {

using u64 = std::uint64_t;
using u128 = unsigned __int128;

u64 mulmod(u64 a, u64 b, u64 m) {
    return static_cast<u64>(static_cast<u128>(a) * b % m);
}

u64 powmod(u64 base, u64 exp, u64 m) {
    u64 r = 1 % m;
    base %= m;
    while (exp > 0) {
        if (exp & 1) r = mulmod(r, base, m);
        base = mulmod(base, base, m);
        exp >>= 1;
    }
    return r;
}

// Modular inverse by extended Euclid; m need not be prime (fails on non-units).
u64 invmod(u64 a, u64 m) {
    std::int64_t t = 0, new_t = 1;
    std::int64_t r = static_cast<std::int64_t>(m), new_r = static_cast<std::int64_t>(a);
    while (new_r != 0) {
        const std::int64_t q = r / new_r;
        t = std::exchange(new_t, t - q * new_t);
        r = std::exchange(new_r, r - q * new_r);
    }
    if (r != 1) throw DivisionByZero("element has no multiplicative inverse");
    if (t < 0) t += static_cast<std::int64_t>(m);
    return static_cast<u64>(t);
}

// ---- dense polynomials over F_p, coefficients low-to-high, trailing zeros trimmed

using Poly = std::vector<u64>;

void poly_trim(Poly& f) {
    while (!f.empty() && f.back() == 0) f.pop_back();
}

std::size_t poly_deg(const Poly& f) { return f.empty() ? 0 : f.size() - 1; }

Poly poly_mod(Poly a, const Poly& f, u64 p) {
    // f monic
    while (a.size() >= f.size() && !a.empty()) {
        const u64 lead = a.back();
        if (lead != 0) {
            const std::size_t shift = a.size() - f.size();
            for (std::size_t i = 0; i < f.size(); ++i) {
                const u64 s = mulmod(lead, f[i], p);
                a[shift + i] = (a[shift + i] + p - s) % p;
            }
        }
        a.pop_back();
        poly_trim(a);
    }
    poly_trim(a);
    return a;
}

Poly poly_mulmod(const Poly& a, const Poly& b, const Poly& f, u64 p) {
    if (a.empty() || b.empty()) return {};
    Poly c(a.size() + b.size() - 1, 0);
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (a[i] == 0) continue;
        for (std::size_t j = 0; j < b.size(); ++j) {
            c[i + j] = (c[i + j] + mulmod(a[i], b[j], p)) % p;
        }
    }
    return poly_mod(std::move(c), f, p);
}

Poly poly_powmod(Poly base, u64 exp, const Poly& f, u64 p) {
    Poly r = {1};
    base = poly_mod(std::move(base), f, p);
    while (exp > 0) {
        if (exp & 1) r = poly_mulmod(r, base, f, p);
        base = poly_mulmod(base, base, f, p);
        exp >>= 1;
    }
    return r;
}

// quotient and remainder of a / b over F_p; b nonzero
std::pair<Poly, Poly> poly_divmod(Poly a, const Poly& b, u64 p) {
    Poly q;
    if (a.size() >= b.size()) q.assign(a.size() - b.size() + 1, 0);
    const u64 lead_inv = invmod(b.back(), p);
    while (a.size() >= b.size() && !a.empty()) {
        const std::size_t shift = a.size() - b.size();
        const u64 coef = mulmod(a.back(), lead_inv, p);
        q[shift] = coef;
        for (std::size_t i = 0; i < b.size(); ++i) {
            const u64 s = mulmod(coef, b[i], p);
            a[shift + i] = (a[shift + i] + p - s) % p;
        }
        poly_trim(a);
    }
    poly_trim(q);
    return {std::move(q), std::move(a)};
}

Poly poly_sub(const Poly& a, const Poly& b, u64 p) {
    Poly out(std::max(a.size(), b.size()), 0);
    for (std::size_t i = 0; i < out.size(); ++i) {
        const u64 x = i < a.size() ? a[i] : 0;
        const u64 y = i < b.size() ? b[i] : 0;
        out[i] = (x + p - y) % p;
    }
    poly_trim(out);
    return out;
}

Poly poly_mul(const Poly& a, const Poly& b, u64 p) {
    if (a.empty() || b.empty()) return {};
    Poly c(a.size() + b.size() - 1, 0);
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (a[i] == 0) continue;
        for (std::size_t j = 0; j < b.size(); ++j)
            c[i + j] = (c[i + j] + mulmod(a[i], b[j], p)) % p;
    }
    poly_trim(c);
    return c;
}

Poly poly_gcd(Poly a, Poly b, u64 p) {
    poly_trim(a);
    poly_trim(b);
    while (!b.empty()) {
        Poly r = poly_divmod(std::move(a), b, p).second;
        a = std::move(b);
        b = std::move(r);
    }
    return a;
}

// f monic of degree m >= 2 is irreducible over F_p iff gcd(f, x^{p^k} - x) = 1
// for all k <= m/2 (x^{p^k} - x is the product of all irreducibles of degree
// dividing k, so this rules out every factor of degree <= m/2, roots included).
bool poly_irreducible(const Poly& f, u64 p) {
    const std::size_t m = poly_deg(f);
    if (m < 2) return false;
    if (f[0] == 0) return false; // divisible by x
    Poly xpow = {0, 1};          // x
    for (std::size_t k = 1; 2 * k <= m; ++k) {
        xpow = poly_powmod(std::move(xpow), p, f, p); // x^{p^k}
        Poly diff = xpow;
        if (diff.size() < 2) diff.resize(2, 0);
        diff[1] = (diff[1] + p - 1) % p;
        Poly g = poly_gcd(f, std::move(diff), p);
        if (poly_deg(g) > 0 || g.empty()) return false; // g empty means f | diff
    }
    return true;
}

u64 checked_pow(u64 p, unsigned m) {
    u128 c = 1;
    for (unsigned i = 0; i < m; ++i) {
        c *= p;
        if (c > (u128{1} << 62)) throw OutOfRange("field cardinality exceeds 2^62");
    }
    return static_cast<u64>(c);
}

// encode/decode between the base-p integer form and coefficient vectors
Poly decode_poly(u64 v, u64 p, unsigned m) {
    Poly out(m, 0);
    for (unsigned i = 0; i < m; ++i) {
        out[i] = v % p;
        v /= p;
    }
    poly_trim(out);
    return out;
}

u64 encode_poly(const Poly& f, u64 p, unsigned m) {
    assert(f.size() <= m);
    u64 v = 0;
    for (std::size_t i = f.size(); i-- > 0;) v = v * p + f[i];
    return v;
}

} // namespace

bool is_prime(u64 n) {
    if (n < 2) return false;
    for (u64 q : {2ULL, 3ULL, 5ULL, 7ULL, 11ULL, 13ULL, 17ULL, 19ULL, 23ULL, 29ULL, 31ULL, 37ULL}) {
        if (n % q == 0) return n == q;
    }
    u64 d = n - 1;
    int s = 0;
    while ((d & 1) == 0) {
        d >>= 1;
        ++s;
    }
    // deterministic Miller-Rabin base set for n < 2^64
    for (u64 a : {2ULL, 3ULL, 5ULL, 7ULL, 11ULL, 13ULL, 17ULL, 19ULL, 23ULL, 29ULL, 31ULL, 37ULL}) {
        u64 x = powmod(a, d, n);
        if (x == 1 || x == n - 1) continue;
        bool witness = true;
        for (int i = 1; i < s; ++i) {
            x = mulmod(x, x, n);
            if (x == n - 1) {
                witness = false;
                break;
            }
        }
        if (witness) return false;
    }
    return true;
}

FieldSpec FieldSpec::prime(u64 p) {
    if (p >= (u64{1} << 32)) throw OutOfRange("prime must be < 2^32");
    if (!is_prime(p)) throw OutOfRange("modulus " + std::to_string(p) + " is not prime");
    FieldSpec s;
    s.kind_ = FieldKind::Prime;
    s.p_ = p;
    s.degree_ = 1;
    s.cardinality_ = p;
    return s;
}

FieldSpec FieldSpec::prime_power(u64 p, unsigned m, std::vector<u64> modulus) {
    if (p >= (u64{1} << 32)) throw OutOfRange("prime must be < 2^32");
    if (!is_prime(p)) throw OutOfRange("base " + std::to_string(p) + " is not prime");
    if (m < 2) throw OutOfRange("extension degree must be >= 2");
    if (modulus.size() != m + 1 || modulus.back() != 1)
        throw OutOfRange("modulus must be monic of degree m (m+1 coefficients, low-to-high)");
    for (u64 c : modulus)
        if (c >= p) throw OutOfRange("modulus coefficients must be reduced mod p");
    if (!poly_irreducible(modulus, p))
        throw OutOfRange("modulus polynomial is reducible over F_p");
    FieldSpec s;
    s.kind_ = FieldKind::PrimePower;
    s.p_ = p;
    s.degree_ = m;
    s.cardinality_ = checked_pow(p, m);
    s.modulus_ = std::move(modulus);
    return s;
}

FieldSpec FieldSpec::prime_power(u64 p, unsigned m) {
    if (p >= (u64{1} << 32)) throw OutOfRange("prime must be < 2^32");
    if (!is_prime(p)) throw OutOfRange("base " + std::to_string(p) + " is not prime");
    if (m < 2) throw OutOfRange("extension degree must be >= 2");
    checked_pow(p, m);
    // lexicographically smallest (c_0, ..., c_{m-1}) with x^m + sum c_i x^i irreducible
    std::vector<u64> c(m, 0);
    for (;;) {
        if (c[0] != 0) { // constant term 0 means divisible by x
            Poly f(c.begin(), c.end());
            f.push_back(1);
            if (poly_irreducible(f, p)) return prime_power(p, m, std::move(f));
        }
        // odometer, last coefficient fastest: counts in lexicographic tuple order
        std::size_t i = m;
        while (i-- > 0) {
            if (++c[i] < p) break;
            c[i] = 0;
            if (i == 0) throw OutOfRange("no irreducible polynomial found"); // unreachable
        }
    }
}

FieldSpec FieldSpec::composite(std::vector<u64> primes) {
    if (primes.empty()) throw OutOfRange("composite ring needs at least one prime");
    std::sort(primes.begin(), primes.end());
    for (std::size_t i = 0; i < primes.size(); ++i) {
        if (primes[i] >= (u64{1} << 32)) throw OutOfRange("prime must be < 2^32");
        if (!is_prime(primes[i]))
            throw OutOfRange("factor " + std::to_string(primes[i]) + " is not prime");
        if (i > 0 && primes[i] == primes[i - 1])
            throw NonDistinctPrimes("composite factors must be distinct primes");
    }
    u128 d = 1;
    for (u64 q : primes) {
        d *= q;
        if (d > (u128{1} << 62)) throw OutOfRange("composite modulus exceeds 2^62");
    }
    FieldSpec s;
    s.kind_ = FieldKind::CompositeSquareFree;
    s.degree_ = 1;
    s.cardinality_ = static_cast<u64>(d);
    s.primes_ = std::move(primes);
    return s;
}

std::uint64_t FieldSpec::characteristic() const {
    if (kind_ == FieldKind::CompositeSquareFree)
        throw WrongFieldKind("composite ring has no prime characteristic");
    return p_;
}

const std::vector<u64>& FieldSpec::modulus() const {
    if (kind_ != FieldKind::PrimePower) throw WrongFieldKind("not an extension field");
    return modulus_;
}

const std::vector<u64>& FieldSpec::primes() const {
    if (kind_ != FieldKind::CompositeSquareFree) throw WrongFieldKind("not a composite ring");
    return primes_;
}

FieldElement FieldSpec::add(FieldElement a, FieldElement b) const {
    assert(contains(a) && contains(b));
    if (kind_ == FieldKind::PrimePower) {
        u64 out = 0, scale = 1;
        for (unsigned i = 0; i < degree_; ++i) {
            const u64 da = a % p_, db = b % p_;
            a /= p_;
            b /= p_;
            u64 s = da + db;
            if (s >= p_) s -= p_;
            out += s * scale;
            scale *= p_;
        }
        return out;
    }
    const u64 s = a + b; // cardinality < 2^62, no overflow
    return s >= cardinality_ ? s - cardinality_ : s;
}

FieldElement FieldSpec::sub(FieldElement a, FieldElement b) const {
    return add(a, neg(b));
}

FieldElement FieldSpec::neg(FieldElement a) const {
    assert(contains(a));
    if (kind_ == FieldKind::PrimePower) {
        u64 out = 0, scale = 1;
        for (unsigned i = 0; i < degree_; ++i) {
            const u64 d = a % p_;
            a /= p_;
            out += (d == 0 ? 0 : p_ - d) * scale;
            scale *= p_;
        }
        return out;
    }
    return a == 0 ? 0 : cardinality_ - a;
}

FieldElement FieldSpec::mul(FieldElement a, FieldElement b) const {
    assert(contains(a) && contains(b));
    switch (kind_) {
    case FieldKind::Prime:
        return mulmod(a, b, p_); // p < 2^32, product fits in 64 bits
    case FieldKind::CompositeSquareFree:
        return static_cast<u64>(static_cast<u128>(a) * b % cardinality_);
    case FieldKind::PrimePower: {
        const Poly fa = decode_poly(a, p_, degree_);
        const Poly fb = decode_poly(b, p_, degree_);
        return encode_poly(poly_mulmod(fa, fb, modulus_, p_), p_, degree_);
    }
    }
    return 0;
}

FieldElement FieldSpec::inv(FieldElement a) const {
    assert(contains(a));
    if (a == 0) throw DivisionByZero("inverse of zero");
    switch (kind_) {
    case FieldKind::Prime:
    case FieldKind::CompositeSquareFree:
        return invmod(a, cardinality_);
    case FieldKind::PrimePower: {
        // extended Euclid over F_p[x]: invariant t_i * a = r_i (mod modulus)
        Poly r0(modulus_), r1 = decode_poly(a, p_, degree_);
        Poly t0, t1 = {1};
        while (!r1.empty()) {
            auto [q, rem] = poly_divmod(std::move(r0), r1, p_);
            Poly t_next = poly_sub(t0, poly_mul(q, t1, p_), p_);
            r0 = std::move(r1);
            r1 = std::move(rem);
            t0 = std::move(t1);
            t1 = std::move(t_next);
        }
        // r0 = gcd, a nonzero constant since the modulus is irreducible
        if (r0.empty() || poly_deg(r0) != 0) throw DivisionByZero("element has no inverse");
        const u64 scale = invmod(r0[0], p_);
        for (auto& c : t0) c = mulmod(c, scale, p_);
        t0 = poly_mod(std::move(t0), modulus_, p_);
        return encode_poly(t0, p_, degree_);
    }
    }
    return 0;
}

FieldElement FieldSpec::trace_to_prime(FieldElement a) const {
    if (kind_ != FieldKind::PrimePower)
        throw WrongFieldKind("trace map requires an extension field");
    FieldElement acc = 0;
    FieldElement x = a;
    for (unsigned i = 0; i < degree_; ++i) {
        acc = add(acc, x);
        if (i + 1 < degree_) {
            // Frobenius: x -> x^p
            const Poly fx = decode_poly(x, p_, degree_);
            x = encode_poly(poly_powmod(fx, p_, modulus_, p_), p_, degree_);
        }
    }
    assert(acc < p_); // the trace lands in the prime subfield
    return acc;
}

bool FieldSpec::operator==(const FieldSpec& other) const {
    return kind_ == other.kind_ && p_ == other.p_ && degree_ == other.degree_ &&
           cardinality_ == other.cardinality_ && modulus_ == other.modulus_ &&
           primes_ == other.primes_;
}

namespace {
void require_same(const FieldSpec& a, const FieldSpec& b) {
    if (a != b) throw MixedField("operands belong to different fields");
}
} // namespace

FieldElement field_add(const FieldSpec& sa, FieldElement a, const FieldSpec& sb, FieldElement b) {
    require_same(sa, sb);
    return sa.add(a, b);
}

FieldElement field_sub(const FieldSpec& sa, FieldElement a, const FieldSpec& sb, FieldElement b) {
    require_same(sa, sb);
    return sa.sub(a, b);
}

FieldElement field_mul(const FieldSpec& sa, FieldElement a, const FieldSpec& sb, FieldElement b) {
    require_same(sa, sb);
    return sa.mul(a, b);
}

std::uint64_t crt_combine(std::span<const u64> residues, std::span<const u64> primes) {
    if (residues.size() != primes.size())
        throw DimensionMismatch("crt_combine: residue/prime count mismatch");
    for (std::size_t i = 0; i < primes.size(); ++i) {
        for (std::size_t j = i + 1; j < primes.size(); ++j)
            if (primes[i] == primes[j]) throw NonDistinctPrimes("crt_combine: duplicate prime");
        if (!is_prime(primes[i])) throw OutOfRange("crt_combine: modulus is not prime");
        if (residues[i] >= primes[i]) throw OutOfRange("crt_combine: residue out of range");
    }
    u128 d = 1;
    for (u64 q : primes) d *= q;
    if (d > (u128{1} << 62)) throw OutOfRange("crt_combine: product exceeds 2^62");
    // Garner-style accumulation: x = x + d_i * ((r_i - x) * inv(d_i) mod p_i)
    u64 x = 0;
    u64 partial = 1;
    for (std::size_t i = 0; i < primes.size(); ++i) {
        const u64 p = primes[i];
        const u64 x_mod = x % p;
        const u64 diff = (residues[i] + p - x_mod) % p;
        const u64 coef = mulmod(diff, invmod(partial % p, p), p);
        x += partial * coef; // < partial * p <= d, fits: d < 2^62
        partial *= p;
    }
    return x;
}

std::vector<u64> crt_split(u64 x, std::span<const u64> primes) {
    for (std::size_t i = 0; i < primes.size(); ++i) {
        for (std::size_t j = i + 1; j < primes.size(); ++j)
            if (primes[i] == primes[j]) throw NonDistinctPrimes("crt_split: duplicate prime");
        if (!is_prime(primes[i])) throw OutOfRange("crt_split: modulus is not prime");
    }
    u128 d = 1;
    for (u64 q : primes) d *= q;
    if (x >= d) throw OutOfRange("crt_split: value out of range");
    std::vector<u64> out;
    out.reserve(primes.size());
    for (u64 q : primes) out.push_back(x % q);
    return out;
}

FieldMatrix::FieldMatrix(std::size_t rows, std::size_t cols, FieldSpec field)
    : rows_(rows), cols_(cols), field_(std::move(field)), entries_(rows * cols, 0) {}

void FieldMatrix::set(std::size_t r, std::size_t c, FieldElement v) {
    if (!field_.contains(v)) throw OutOfRange("matrix entry not in field");
    entries_[r * cols_ + c] = v;
}

FieldMatrix FieldMatrix::transposed() const {
    FieldMatrix t(cols_, rows_, field_);
    for (std::size_t r = 0; r < rows_; ++r)
        for (std::size_t c = 0; c < cols_; ++c) t.set(c, r, at(r, c));
    return t;
}

unsigned rank(const FieldMatrix& m) {
    const FieldSpec& f = m.field();
    if (f.kind() == FieldKind::CompositeSquareFree)
        throw CompositeFieldRank("rank over a composite ring is undefined; split per prime");

    const std::size_t rows = m.rows(), cols = m.cols();
    std::vector<FieldElement> a(m.entries().begin(), m.entries().end());
    auto at = [&](std::size_t r, std::size_t c) -> FieldElement& { return a[r * cols + c]; };

    unsigned rk = 0;
    for (std::size_t col = 0; col < cols && rk < rows; ++col) {
        std::size_t pivot = rk;
        while (pivot < rows && at(pivot, col) == 0) ++pivot;
        if (pivot == rows) continue;
        if (pivot != rk)
            for (std::size_t c = col; c < cols; ++c) std::swap(at(pivot, c), at(rk, c));
        const FieldElement inv_p = f.inv(at(rk, col));
        for (std::size_t r = rk + 1; r < rows; ++r) {
            const FieldElement factor = at(r, col);
            if (factor == 0) continue;
            const FieldElement scale = f.mul(factor, inv_p);
            at(r, col) = 0;
            for (std::size_t c = col + 1; c < cols; ++c)
                at(r, c) = f.sub(at(r, c), f.mul(scale, at(rk, c)));
        }
        ++rk;
    }
    return rk;
}

} // namespace ame
