// Finite fields F_{p^a}, prime-subfield dimension, matrices and linear-form systems, generic matrices.
#pragma once

#include <memory>
#include <optional>
#include <ostream>
#include <set>

#include "designforge/core.hpp"

namespace designforge {

inline bool is_prime(long long p) {
    if (p < 2) return false;
    for (long long d = 2; d * d <= p; ++d)
        if (p % d == 0) return false;
    return true;
}

// Returns (p, a) with n = p^a, or nullopt if n is not a prime power.
inline std::optional<std::pair<int, int>> prime_power(long long n) {
    if (n < 2) return std::nullopt;
    for (long long p = 2; p <= n; ++p) {
        if (n % p) continue;
        if (!is_prime(p)) return std::nullopt;
        int a = 0;
        long long m = n;
        while (m % p == 0) { m /= p; ++a; }
        if (m != 1) return std::nullopt;
        return std::make_pair(static_cast<int>(p), a);
    }
    return std::nullopt;
}

// Polynomials over F_p as coefficient vectors, lowest degree first.
namespace poly {
using Poly = std::vector<int>;

inline void trim(Poly& f) { while (!f.empty() && f.back() == 0) f.pop_back(); }

inline Poly mod(Poly f, const Poly& g, int p) {
    // g monic
    trim(f);
    const int dg = static_cast<int>(g.size()) - 1;
    while (static_cast<int>(f.size()) - 1 >= dg) {
        int c = f.back();
        int shift = static_cast<int>(f.size()) - 1 - dg;
        for (int k = 0; k <= dg; ++k) f[shift + k] = ((f[shift + k] - c * g[k]) % p + p) % p;
        trim(f);
    }
    return f;
}

inline bool irreducible(const Poly& f, int p) {
    const int deg = static_cast<int>(f.size()) - 1;
    for (int d = 1; 2 * d <= deg; ++d) {
        long long count = 1;
        for (int k = 0; k < d; ++k) count *= p;
        for (long long m = 0; m < count; ++m) {
            Poly g(d + 1);
            long long t = m;
            for (int k = 0; k < d; ++k) { g[k] = static_cast<int>(t % p); t /= p; }
            g[d] = 1;
            if (mod(f, g, p).empty()) return false;
        }
    }
    return true;
}
}  // namespace poly

class Field {
public:
    Field(int p, int a) : p_(p), a_(a) {
        if (!is_prime(p)) throw DesignError("field characteristic must be prime");
        if (a < 1) throw DesignError("field degree must be >= 1");
        long long n = 1;
        for (int k = 0; k < a; ++k) {
            n *= p;
            if (n > (1LL << 30)) throw DesignError("field too large");
        }
        n_ = static_cast<int>(n);
        pw_.resize(a + 1, 1);
        for (int k = 1; k <= a; ++k) pw_[k] = pw_[k - 1] * p;
        pick_modulus();
        if (n_ <= (1 << 16)) build_tables();
    }

    int p() const { return p_; }
    int a() const { return a_; }
    int size() const { return n_; }
    const poly::Poly& modulus() const { return modulus_; }

    int digit(int x, int k) const { return (x / pw_[k]) % p_; }
    bool in_prime_field(int x) const { return x >= 0 && x < p_; }
    int from_int(long long k) const { return static_cast<int>(((k % p_) + p_) % p_); }

    int add(int x, int y) const {
        if (p_ == 2) return x ^ y;
        if (a_ == 1) return (x + y) % p_;
        int out = 0;
        for (int k = 0; k < a_; ++k) out += ((digit(x, k) + digit(y, k)) % p_) * pw_[k];
        return out;
    }
    int neg(int x) const {
        if (p_ == 2) return x;
        if (a_ == 1) return x ? p_ - x : 0;
        int out = 0;
        for (int k = 0; k < a_; ++k) out += ((p_ - digit(x, k)) % p_) * pw_[k];
        return out;
    }
    int sub(int x, int y) const { return add(x, neg(y)); }

    int mul(int x, int y) const {
        if (x == 0 || y == 0) return 0;
        if (a_ == 1) return static_cast<int>(static_cast<long long>(x) * y % p_);
        if (!exp_.empty()) {
            int s = log_[x] + log_[y];
            if (s >= n_ - 1) s -= n_ - 1;
            return exp_[s];
        }
        return mul_slow(x, y);
    }
    int inv(int x) const {
        if (x == 0) throw DesignError("inverse of zero");
        if (!exp_.empty()) return exp_[(n_ - 1 - log_[x]) % (n_ - 1)];
        return pow(x, n_ - 2);
    }
    int div(int x, int y) const { return mul(x, inv(y)); }
    int pow(int x, long long e) const {
        int r = 1, b = x;
        while (e > 0) {
            if (e & 1) r = mul(r, b);
            b = mul(b, b);
            e >>= 1;
        }
        return r;
    }
    // multiplicative order of a nonzero element
    long long order(int x) const {
        if (x == 0) throw DesignError("order of zero");
        long long k = 1;
        int y = x;
        while (y != 1) { y = mul(y, x); ++k; }
        return k;
    }

    std::string str(int x) const {
        if (a_ == 1) return std::to_string(x);
        std::string s;
        for (int k = a_ - 1; k >= 0; --k) {
            int c = digit(x, k);
            if (!c) continue;
            if (!s.empty()) s += "+";
            if (k == 0 || c != 1) s += std::to_string(c);
            if (k >= 1) s += "x";
            if (k >= 2) s += "^" + std::to_string(k);
        }
        return s.empty() ? "0" : s;
    }

private:
    int mul_slow(int x, int y) const {
        poly::Poly f(2 * a_ - 1, 0);
        for (int i = 0; i < a_; ++i) {
            int xi = digit(x, i);
            if (!xi) continue;
            for (int j = 0; j < a_; ++j) f[i + j] = (f[i + j] + xi * digit(y, j)) % p_;
        }
        poly::Poly g = poly::mod(f, modulus_, p_);
        int out = 0;
        for (std::size_t k = 0; k < g.size(); ++k) out += g[k] * pw_[k];
        return out;
    }

    void pick_modulus() {
        // Least monic irreducible, compared from the x^{a-1} coefficient downwards.
        for (int m = 0; m < n_; ++m) {
            poly::Poly f(a_ + 1);
            for (int k = 0; k < a_; ++k) f[k] = (m / pw_[k]) % p_;
            f[a_] = 1;
            if (a_ == 1 || poly::irreducible(f, p_)) {
                modulus_ = f;
                return;
            }
        }
        throw DesignError("no irreducible polynomial found");
    }

    void build_tables() {
        int g = -1;
        for (int x = 1; x < n_ && g < 0; ++x) {
            long long k = 1;
            int y = x;
            while (y != 1) { y = a_ == 1 ? static_cast<int>(1LL * y * x % p_) : mul_slow(y, x); ++k; }
            if (k == n_ - 1) g = x;
        }
        exp_.assign(n_ - 1, 0);
        log_.assign(n_, 0);
        int y = 1;
        for (int k = 0; k < n_ - 1; ++k) {
            exp_[k] = y;
            log_[y] = k;
            y = a_ == 1 ? static_cast<int>(1LL * y * g % p_) : mul_slow(y, g);
        }
    }

    int p_, a_, n_;
    std::vector<int> pw_;
    poly::Poly modulus_;
    std::vector<int> exp_, log_;
};

using FieldPtr = std::shared_ptr<const Field>;

inline FieldPtr make_field(int p, int a) { return std::make_shared<const Field>(p, a); }

// ---- matrices over a field -----------------------------------------------------------

using Mat = std::vector<std::vector<int>>;

inline Mat zero_mat(int rows, int cols) { return Mat(rows, std::vector<int>(cols, 0)); }

inline Mat identity_mat(int k) {
    Mat m = zero_mat(k, k);
    for (int i = 0; i < k; ++i) m[i][i] = 1;
    return m;
}

inline int mat_cols(const Mat& m) { return m.empty() ? 0 : static_cast<int>(m[0].size()); }

inline Mat mat_mul(const Field& F, const Mat& A, const Mat& B, int inner = -1) {
    const int n = static_cast<int>(A.size());
    const int k = inner >= 0 ? inner : static_cast<int>(B.size());
    const int m = B.empty() ? 0 : static_cast<int>(B[0].size());
    Mat C = zero_mat(n, m);
    for (int i = 0; i < n; ++i)
        for (int t = 0; t < k; ++t) {
            int a = A[i][t];
            if (!a) continue;
            for (int j = 0; j < m; ++j) C[i][j] = F.add(C[i][j], F.mul(a, B[t][j]));
        }
    return C;
}

inline std::vector<int> mat_vec(const Field& F, const Mat& A, const std::vector<int>& v) {
    std::vector<int> out(A.size(), 0);
    for (std::size_t i = 0; i < A.size(); ++i)
        for (std::size_t j = 0; j < v.size(); ++j) out[i] = F.add(out[i], F.mul(A[i][j], v[j]));
    return out;
}

// Row-reduces in place to reduced echelon form; returns pivot columns.
inline std::vector<int> rref(const Field& F, Mat& A) {
    std::vector<int> piv;
    const int rows = static_cast<int>(A.size());
    const int cols = mat_cols(A);
    int r = 0;
    for (int c = 0; c < cols && r < rows; ++c) {
        int s = r;
        while (s < rows && A[s][c] == 0) ++s;
        if (s == rows) continue;
        std::swap(A[s], A[r]);
        int iv = F.inv(A[r][c]);
        for (int j = 0; j < cols; ++j) A[r][j] = F.mul(A[r][j], iv);
        for (int i = 0; i < rows; ++i) {
            if (i == r || A[i][c] == 0) continue;
            int f = A[i][c];
            for (int j = 0; j < cols; ++j) A[i][j] = F.sub(A[i][j], F.mul(f, A[r][j]));
        }
        piv.push_back(c);
        ++r;
    }
    return piv;
}

inline int mat_rank(const Field& F, Mat A) { return static_cast<int>(rref(F, A).size()); }

inline int mat_det(const Field& F, Mat A) {
    const int k = static_cast<int>(A.size());
    int det = 1;
    for (int c = 0; c < k; ++c) {
        int s = c;
        while (s < k && A[s][c] == 0) ++s;
        if (s == k) return 0;
        if (s != c) { std::swap(A[s], A[c]); det = F.neg(det); }
        det = F.mul(det, A[c][c]);
        int iv = F.inv(A[c][c]);
        for (int i = c + 1; i < k; ++i) {
            if (!A[i][c]) continue;
            int f = F.mul(A[i][c], iv);
            for (int j = c; j < k; ++j) A[i][j] = F.sub(A[i][j], F.mul(f, A[c][j]));
        }
    }
    return det;
}

inline std::optional<Mat> mat_inverse(const Field& F, const Mat& A) {
    const int k = static_cast<int>(A.size());
    Mat aug = zero_mat(k, 2 * k);
    for (int i = 0; i < k; ++i) {
        for (int j = 0; j < k; ++j) aug[i][j] = A[i][j];
        aug[i][k + i] = 1;
    }
    auto piv = rref(F, aug);
    if (static_cast<int>(piv.size()) < k || piv[k - 1] != k - 1) return std::nullopt;
    Mat out = zero_mat(k, k);
    for (int i = 0; i < k; ++i)
        for (int j = 0; j < k; ++j) out[i][j] = aug[i][k + j];
    return out;
}

// Some z with A z = b, or nullopt.
inline std::optional<std::vector<int>> mat_solve(const Field& F, const Mat& A, const std::vector<int>& b) {
    const int rows = static_cast<int>(A.size());
    const int cols = mat_cols(A);
    Mat aug = zero_mat(rows, cols + 1);
    for (int i = 0; i < rows; ++i) {
        for (int j = 0; j < cols; ++j) aug[i][j] = A[i][j];
        aug[i][cols] = b[i];
    }
    auto piv = rref(F, aug);
    std::vector<int> z(cols, 0);
    for (std::size_t i = 0; i < piv.size(); ++i) {
        if (piv[i] == cols) return std::nullopt;
        z[piv[i]] = aug[i][cols];
    }
    return z;
}

// Basis of {z : A z = 0}; entries stay in F_p when A has entries in F_p.
inline std::vector<std::vector<int>> mat_kernel(const Field& F, const Mat& A, int cols) {
    Mat R = A;
    auto piv = rref(F, R);
    std::vector<bool> is_piv(cols, false);
    for (int c : piv) is_piv[c] = true;
    std::vector<std::vector<int>> basis;
    for (int f = 0; f < cols; ++f) {
        if (is_piv[f]) continue;
        std::vector<int> v(cols, 0);
        v[f] = 1;
        for (std::size_t i = 0; i < piv.size(); ++i) v[piv[i]] = F.neg(R[i][f]);
        basis.push_back(v);
    }
    return basis;
}

inline std::string mat_str(const Mat& m) {
    std::ostringstream os;
    for (std::size_t i = 0; i < m.size(); ++i) {
        for (std::size_t j = 0; j < m[i].size(); ++j) os << (j ? " " : "") << m[i][j];
        os << "\n";
    }
    return os.str();
}

// dim over the prime subfield of the span of the given elements.
inline int field_dim(const Field& F, const std::vector<int>& elems) {
    Field Fp(F.p(), 1);
    Mat A;
    for (int x : elems) {
        std::vector<int> row(F.a());
        for (int k = 0; k < F.a(); ++k) row[k] = F.digit(x, k);
        A.push_back(row);
    }
    return A.empty() ? 0 : mat_rank(Fp, A);
}

// All v + mu d for mu in the field; d must be a nonzero vector over F_p.
inline std::vector<std::vector<int>> basic_line(const Field& F, const std::vector<int>& v, const std::vector<int>& d) {
    if (v.size() != d.size()) throw DesignError("basic line: dimension mismatch");
    bool nz = false;
    for (int x : d) {
        if (!F.in_prime_field(x)) throw DesignError("basic line direction must lie over the prime field");
        nz = nz || x != 0;
    }
    if (!nz) throw DesignError("basic line direction is zero");
    std::vector<std::vector<int>> pts;
    pts.reserve(F.size());
    for (int mu = 0; mu < F.size(); ++mu) {
        std::vector<int> pt(v.size());
        for (std::size_t k = 0; k < v.size(); ++k) pt[k] = F.add(v[k], F.mul(mu, d[k]));
        pts.push_back(pt);
    }
    return pts;
}

// ---- linear-form systems -------------------------------------------------------------

// L_v(z) = M[v] . z + C[v] for labels v = 0..|X|-1 and variables z_0..z_{g-1}.
struct LinearSystem {
    FieldPtr F;
    Mat M;
    std::vector<int> C;
    int g = 0;

    int forms() const { return static_cast<int>(C.size()); }
    int dim() const { return M.empty() || g == 0 ? 0 : mat_rank(*F, M); }

    bool basic() const {
        for (auto& row : M)
            for (int x : row)
                if (!F->in_prime_field(x)) return false;
        return true;
    }
    bool simple() const {
        std::set<std::pair<std::vector<int>, int>> seen;
        for (int v = 0; v < forms(); ++v)
            if (!seen.insert({M[v], C[v]}).second) return false;
        return true;
    }
    std::vector<int> eval(const std::vector<int>& z) const {
        auto out = mat_vec(*F, M, z);
        for (int v = 0; v < forms(); ++v) out[v] = F->add(out[v], C[v]);
        return out;
    }
    LinearSystem restrict_to(const std::vector<int>& S) const {
        LinearSystem L{F, {}, {}, g};
        for (int v : S) {
            L.M.push_back(M[v]);
            L.C.push_back(C[v]);
        }
        return L;
    }
    // L[L^z]: substitute z = L^z(y).
    LinearSystem compose(const LinearSystem& Lz) const {
        if (Lz.forms() != g) throw DesignError("specialisation needs one form per variable");
        LinearSystem out{F, {}, {}, Lz.g};
        out.M = mat_mul(*F, M, Lz.M, g);
        for (auto& row : out.M) row.resize(Lz.g, 0);
        out.C = mat_vec(*F, M, Lz.C);
        for (int v = 0; v < forms(); ++v) out.C[v] = F->add(out.C[v], C[v]);
        return out;
    }
    // Affine image; only for tiny systems.
    std::set<std::vector<int>> image() const {
        std::set<std::vector<int>> out;
        long long total = 1;
        for (int i = 0; i < g; ++i) {
            total *= F->size();
            if (total > 2000000) throw DesignError("image enumeration too large");
        }
        std::vector<int> z(g, 0);
        for (long long t = 0; t < total; ++t) {
            long long u = t;
            for (int i = 0; i < g; ++i) { z[i] = static_cast<int>(u % F->size()); u /= F->size(); }
            out.insert(eval(z));
        }
        return out;
    }
};

struct Specialisation {
    LinearSystem Lz;      // forms in the new variables y, one per old variable
    LinearSystem result;  // L[L^z]
};

// Specialisation whose image is {v in Im(L) : v[S] = e}; nullopt when e is not in Im(L_S).
inline std::optional<Specialisation> specialize(const LinearSystem& L, const std::vector<int>& S, const std::vector<int>& e) {
    const Field& F = *L.F;
    if (S.size() != e.size()) throw DesignError("specialize: target length mismatch");
    Mat A;
    std::vector<int> rhs;
    for (std::size_t k = 0; k < S.size(); ++k) {
        A.push_back(L.M[S[k]]);
        rhs.push_back(F.sub(e[k], L.C[S[k]]));
    }
    std::vector<int> z0(L.g, 0);
    std::vector<std::vector<int>> K;
    if (!S.empty() && L.g > 0) {
        auto sol = mat_solve(F, A, rhs);
        if (!sol) return std::nullopt;
        z0 = *sol;
        K = mat_kernel(F, A, L.g);
    } else {
        for (std::size_t k = 0; k < S.size(); ++k)
            if (rhs[k] != 0) return std::nullopt;
        K = mat_kernel(F, Mat{}, L.g);
    }
    LinearSystem Lz{L.F, zero_mat(L.g, static_cast<int>(K.size())), z0, static_cast<int>(K.size())};
    for (std::size_t j = 0; j < K.size(); ++j)
        for (int i = 0; i < L.g; ++i) Lz.M[i][j] = K[j][i];
    return Specialisation{Lz, L.compose(Lz)};
}

// dim over F_p of C(L) together with C(L^z) equals dim C(L) + g.
inline bool generic_wrt(const LinearSystem& L, const LinearSystem& Lz) {
    std::vector<int> all = L.C;
    int base = field_dim(*L.F, L.C);
    all.insert(all.end(), Lz.C.begin(), Lz.C.end());
    return field_dim(*L.F, all) == base + static_cast<int>(Lz.C.size());
}

// ---- generic matrices ----------------------------------------------------------------

inline bool is_generic(const Field& F, const Mat& M) {
    const int q = static_cast<int>(M.size());
    const int r = mat_cols(M);
    auto rows = iota_vec(q), cols = iota_vec(r);
    for (int k = 1; k <= std::min(q, r); ++k) {
        bool ok = true;
        for_each_subset(rows, k, [&](const VSet& R) {
            if (!ok) return;
            for_each_subset(cols, k, [&](const VSet& C) {
                if (!ok) return;
                Mat sub = zero_mat(k, k);
                for (int i = 0; i < k; ++i)
                    for (int j = 0; j < k; ++j) sub[i][j] = M[R[i]][C[j]];
                if (mat_det(F, sub) == 0) ok = false;
            });
        });
        if (!ok) return false;
    }
    return true;
}

// Lexicographically least (row-major) q x r matrix over F_p with every square minor nonsingular.
inline std::optional<Mat> find_generic_matrix_opt(int p, int q, int r) {
    if (!is_prime(p)) throw DesignError("generic matrix: p must be prime");
    if (q < 1 || r < 1) throw DesignError("generic matrix needs q, r >= 1");
    Field F(p, 1);
    Mat M = zero_mat(q, r);
    const int cells = q * r;
    // Minors whose last cell in row-major order is (i,j) are checked when (i,j) is set.
    std::function<bool(int)> dfs = [&](int idx) -> bool {
        if (idx == cells) return true;
        const int i = idx / r, j = idx % r;
        for (int val = 1; val < p; ++val) {
            M[i][j] = val;
            bool ok = true;
            const int kmax = std::min(i + 1, j + 1);
            for (int k = 2; k <= kmax && ok; ++k) {
                auto prev_rows = iota_vec(i), prev_cols = iota_vec(j);
                for_each_subset(prev_rows, k - 1, [&](const VSet& R0) {
                    if (!ok) return;
                    for_each_subset(prev_cols, k - 1, [&](const VSet& C0) {
                        if (!ok) return;
                        VSet R = R0, C = C0;
                        R.push_back(i);
                        C.push_back(j);
                        Mat sub = zero_mat(k, k);
                        for (int a = 0; a < k; ++a)
                            for (int b = 0; b < k; ++b) sub[a][b] = M[R[a]][C[b]];
                        if (mat_det(F, sub) == 0) ok = false;
                    });
                });
            }
            if (ok && dfs(idx + 1)) return true;
        }
        M[i][j] = 0;
        return false;
    };
    if (!dfs(0)) return std::nullopt;
    return M;
}

inline Mat find_generic_matrix(int p, int q, int r) {
    auto M = find_generic_matrix_opt(p, q, r);
    if (!M) throw DesignError("no generic " + std::to_string(q) + "x" + std::to_string(r) +
                              " matrix over F_" + std::to_string(p));
    return *M;
}

// e^I: the |I| x q matrix whose rows are the unit vectors e^i, i in I (ascending).
inline Mat unit_rows(const VSet& I, int q) {
    Mat E = zero_mat(static_cast<int>(I.size()), q);
    for (std::size_t k = 0; k < I.size(); ++k) E[k][I[k]] = 1;
    return E;
}

// Q^I = (e^I M)^{-1} e^I, an r x q matrix.
inline Mat Q_of(const Field& F, const Mat& M, const VSet& I) {
    const int q = static_cast<int>(M.size());
    Mat EIM;
    for (int i : I) EIM.push_back(M[i]);
    auto inv = mat_inverse(F, EIM);
    if (!inv) throw DesignError("e^I M is singular; matrix is not generic");
    return mat_mul(F, *inv, unit_rows(I, q));
}

}  // namespace designforge
