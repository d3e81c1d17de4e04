#include "geomarket/composite_group.hpp"

#include <array>
#include <cstring>

#include "geomarket/bigint.hpp"

namespace geomarket::pairing {

namespace detail {

// Field policies. Both expose the same interface so the curve and pairing
// algorithms below are written once.

class MpzField {
 public:
  using Elem = mpz_class;

  explicit MpzField(const mpz_class& p) : p_(p) {}

  void mul(Elem& r, const Elem& a, const Elem& b) const {
    mpz_mul(r.get_mpz_t(), a.get_mpz_t(), b.get_mpz_t());
    mpz_mod(r.get_mpz_t(), r.get_mpz_t(), p_.get_mpz_t());
  }
  void add(Elem& r, const Elem& a, const Elem& b) const {
    mpz_add(r.get_mpz_t(), a.get_mpz_t(), b.get_mpz_t());
    if (mpz_cmp(r.get_mpz_t(), p_.get_mpz_t()) >= 0) mpz_sub(r.get_mpz_t(), r.get_mpz_t(), p_.get_mpz_t());
  }
  void sub(Elem& r, const Elem& a, const Elem& b) const {
    mpz_sub(r.get_mpz_t(), a.get_mpz_t(), b.get_mpz_t());
    if (mpz_sgn(r.get_mpz_t()) < 0) mpz_add(r.get_mpz_t(), r.get_mpz_t(), p_.get_mpz_t());
  }
  void inv(Elem& r, const Elem& a) const {
    if (mpz_invert(r.get_mpz_t(), a.get_mpz_t(), p_.get_mpz_t()) == 0) {
      throw Error(ErrorCode::kCrypto, "field element is not invertible");
    }
  }
  bool is_zero(const Elem& a) const { return mpz_sgn(a.get_mpz_t()) == 0; }
  Elem zero() const { return 0; }
  Elem one() const { return 1; }
  Elem from_mpz(const mpz_class& v) const { return v; }
  mpz_class to_mpz(const Elem& v) const { return v; }

 private:
  mpz_class p_;
};

/// Montgomery arithmetic on N 64-bit limbs (CIOS multiplication).
template <std::size_t N>
class MontField {
 public:
  using Elem = std::array<std::uint64_t, N>;
  using u128 = unsigned __int128;

  explicit MontField(const mpz_class& p) : p_mpz_(p) {
    std::size_t count = 0;
    mpz_export(p_.data(), &count, -1, sizeof(std::uint64_t), 0, 0, p.get_mpz_t());
    std::uint64_t inv = 1;
    for (int i = 0; i < 7; ++i) inv *= 2 - p_[0] * inv;
    pinv_ = ~inv + 1;
    mpz_class r = mpz_class(1) << (64 * N);
    one_ = export_limbs(mpz_class(r % p));
    r2_ = export_limbs(mpz_class((r * r) % p));
  }

  void mul(Elem& r, const Elem& a, const Elem& b) const {
    std::uint64_t t[N + 2] = {};
    for (std::size_t i = 0; i < N; ++i) {
      u128 c = 0;
      for (std::size_t j = 0; j < N; ++j) {
        c += static_cast<u128>(a[j]) * b[i] + t[j];
        t[j] = static_cast<std::uint64_t>(c);
        c >>= 64;
      }
      c += t[N];
      t[N] = static_cast<std::uint64_t>(c);
      t[N + 1] = static_cast<std::uint64_t>(c >> 64);
      const std::uint64_t m = t[0] * pinv_;
      c = static_cast<u128>(m) * p_[0] + t[0];
      c >>= 64;
      for (std::size_t j = 1; j < N; ++j) {
        c += static_cast<u128>(m) * p_[j] + t[j];
        t[j - 1] = static_cast<std::uint64_t>(c);
        c >>= 64;
      }
      c += t[N];
      t[N - 1] = static_cast<std::uint64_t>(c);
      t[N] = t[N + 1] + static_cast<std::uint64_t>(c >> 64);
    }
    Elem res;
    std::memcpy(res.data(), t, sizeof(res));
    if (t[N] != 0 || !less(res, p_)) sub_raw(res, p_);
    r = res;
  }

  void add(Elem& r, const Elem& a, const Elem& b) const {
    u128 c = 0;
    Elem res;
    for (std::size_t j = 0; j < N; ++j) {
      c += static_cast<u128>(a[j]) + b[j];
      res[j] = static_cast<std::uint64_t>(c);
      c >>= 64;
    }
    if (c != 0 || !less(res, p_)) sub_raw(res, p_);
    r = res;
  }

  void sub(Elem& r, const Elem& a, const Elem& b) const {
    Elem res = a;
    if (sub_raw(res, b)) {
      u128 c = 0;
      for (std::size_t j = 0; j < N; ++j) {
        c += static_cast<u128>(res[j]) + p_[j];
        res[j] = static_cast<std::uint64_t>(c);
        c >>= 64;
      }
    }
    r = res;
  }

  void inv(Elem& r, const Elem& a) const {
    mpz_class v = to_mpz(a);
    if (mpz_invert(v.get_mpz_t(), v.get_mpz_t(), p_mpz_.get_mpz_t()) == 0) {
      throw Error(ErrorCode::kCrypto, "field element is not invertible");
    }
    r = from_mpz(v);
  }

  bool is_zero(const Elem& a) const {
    for (std::uint64_t w : a) {
      if (w != 0) return false;
    }
    return true;
  }
  Elem zero() const { return Elem{}; }
  Elem one() const { return one_; }

  Elem from_mpz(const mpz_class& v) const {
    Elem x = export_limbs(v);
    mul(x, x, r2_);
    return x;
  }

  mpz_class to_mpz(const Elem& v) const {
    Elem unit{};
    unit[0] = 1;
    Elem x;
    mul(x, v, unit);
    mpz_class out;
    mpz_import(out.get_mpz_t(), N, -1, sizeof(std::uint64_t), 0, 0, x.data());
    return out;
  }

 private:
  static bool less(const Elem& a, const Elem& b) {
    for (std::size_t j = N; j-- > 0;) {
      if (a[j] != b[j]) return a[j] < b[j];
    }
    return false;
  }

  // a -= b, returns the final borrow.
  static bool sub_raw(Elem& a, const Elem& b) {
    std::uint64_t borrow = 0;
    for (std::size_t j = 0; j < N; ++j) {
      u128 d = static_cast<u128>(a[j]) - b[j] - borrow;
      a[j] = static_cast<std::uint64_t>(d);
      borrow = static_cast<std::uint64_t>(d >> 64) & 1u;
    }
    return borrow != 0;
  }

  Elem export_limbs(const mpz_class& v) const {
    mpz_class reduced = v % p_mpz_;
    if (reduced < 0) reduced += p_mpz_;
    Elem out{};
    std::size_t count = 0;
    mpz_export(out.data(), &count, -1, sizeof(std::uint64_t), 0, 0, reduced.get_mpz_t());
    return out;
  }

  mpz_class p_mpz_;
  Elem p_{};
  Elem one_{};
  Elem r2_{};
  std::uint64_t pinv_ = 0;
};

class Engine {
 public:
  virtual ~Engine() = default;
  virtual std::string name() const = 0;
  virtual Point mul(const Point& base, const mpz_class& k) const = 0;
  virtual Point sum(std::span<const Point* const> points) const = 0;
  virtual Gt pair(const Point& a, const Point& b) const = 0;
  virtual Gt gt_mul(const Gt& a, const Gt& b) const = 0;
  virtual Gt gt_pow(const Gt& a, const mpz_class& k) const = 0;
  virtual Gt final_exponentiation(const Gt& a) const = 0;
};

template <class F>
class Ops {
 public:
  using E = typename F::Elem;
  struct Jac {
    E X, Y, Z;
    bool inf = true;
  };
  struct Aff {
    E x, y;
    bool inf = true;
  };
  struct Ext {
    E a, b;
  };

  explicit Ops(const F& f) : f_(f) {}

  Aff aff(const Point& p) const {
    Aff out;
    if (!p.infinity) {
      out.x = f_.from_mpz(p.x);
      out.y = f_.from_mpz(p.y);
      out.inf = false;
    }
    return out;
  }
  Ext ext(const Gt& v) const { return Ext{f_.from_mpz(v.a), f_.from_mpz(v.b)}; }
  Gt gt(const Ext& v) const { return Gt{f_.to_mpz(v.a), f_.to_mpz(v.b)}; }
  Ext ext_one() const { return Ext{f_.one(), f_.zero()}; }

  void dbl(Jac& t) {
    if (t.inf) return;
    if (f_.is_zero(t.Y)) {
      t.inf = true;
      return;
    }
    f_.mul(xx_, t.X, t.X);
    f_.mul(yy_, t.Y, t.Y);
    f_.mul(zz_, t.Z, t.Z);
    f_.mul(s_, t.X, yy_);
    f_.add(s_, s_, s_);
    f_.add(s_, s_, s_);
    f_.add(m_, xx_, xx_);
    f_.add(m_, m_, xx_);
    f_.mul(tmp_, zz_, zz_);
    f_.add(m_, m_, tmp_);  // curve coefficient a = 1
    f_.mul(t.Z, t.Y, t.Z);
    f_.add(t.Z, t.Z, t.Z);
    f_.mul(tmp_, m_, m_);
    f_.sub(tmp_, tmp_, s_);
    f_.sub(t.X, tmp_, s_);
    f_.sub(s_, s_, t.X);
    f_.mul(s_, m_, s_);
    f_.mul(yy_, yy_, yy_);
    f_.add(yy_, yy_, yy_);
    f_.add(yy_, yy_, yy_);
    f_.add(yy_, yy_, yy_);
    f_.sub(t.Y, s_, yy_);
  }

  void add_affine(Jac& t, const Aff& a) {
    if (a.inf) return;
    if (t.inf) {
      t.X = a.x;
      t.Y = a.y;
      t.Z = f_.one();
      t.inf = false;
      return;
    }
    f_.mul(zz_, t.Z, t.Z);
    f_.mul(u2_, a.x, zz_);
    f_.mul(s2_, a.y, t.Z);
    f_.mul(s2_, s2_, zz_);
    f_.sub(h_, u2_, t.X);
    f_.sub(r_, s2_, t.Y);
    if (f_.is_zero(h_)) {
      if (f_.is_zero(r_)) {
        dbl(t);
      } else {
        t.inf = true;
      }
      return;
    }
    f_.mul(hh_, h_, h_);
    f_.mul(hhh_, h_, hh_);
    f_.mul(v_, t.X, hh_);
    f_.mul(t.Z, t.Z, h_);
    f_.mul(tmp_, r_, r_);
    f_.sub(tmp_, tmp_, hhh_);
    f_.sub(tmp_, tmp_, v_);
    f_.sub(t.X, tmp_, v_);
    f_.sub(v_, v_, t.X);
    f_.mul(v_, r_, v_);
    f_.mul(hhh_, t.Y, hhh_);
    f_.sub(t.Y, v_, hhh_);
  }

  Point to_point(const Jac& t) {
    if (t.inf) return Point::at_infinity();
    f_.inv(tmp_, t.Z);
    f_.mul(zz_, tmp_, tmp_);
    E x, y;
    f_.mul(x, t.X, zz_);
    f_.mul(zz_, zz_, tmp_);
    f_.mul(y, t.Y, zz_);
    return Point{f_.to_mpz(x), f_.to_mpz(y), false};
  }

  void ext_mul(Ext& r, const Ext& a, const Ext& b) {
    f_.mul(t0_, a.a, b.a);
    f_.mul(t1_, a.b, b.b);
    f_.add(t2_, a.a, a.b);
    f_.add(t3_, b.a, b.b);
    f_.mul(t2_, t2_, t3_);
    f_.sub(t2_, t2_, t0_);
    f_.sub(r.b, t2_, t1_);
    f_.sub(r.a, t0_, t1_);
  }

  void ext_sqr(Ext& r, const Ext& a) {
    f_.add(t0_, a.a, a.b);
    f_.sub(t1_, a.a, a.b);
    f_.mul(t2_, a.a, a.b);
    f_.mul(r.a, t0_, t1_);
    f_.add(r.b, t2_, t2_);
  }

  Ext ext_pow(const Ext& a, const mpz_class& k) {
    Ext r = ext_one();
    for (long i = static_cast<long>(mpz_sizeinbase(k.get_mpz_t(), 2)) - 1; i >= 0; --i) {
      ext_sqr(r, r);
      if (mpz_tstbit(k.get_mpz_t(), static_cast<mp_bitcnt_t>(i))) ext_mul(r, r, a);
    }
    return r;
  }

  // f^((P^2 - 1)/n) = (f^(P - 1))^h, and f^P = conj(f) because P = 3 mod 4,
  // so f^(P - 1) = conj(f)^2 / norm(f).
  Ext final_exp(const Ext& f, const mpz_class& cofactor) {
    E norm, t;
    f_.mul(norm, f.a, f.a);
    f_.mul(t, f.b, f.b);
    f_.add(norm, norm, t);
    f_.inv(norm, norm);
    Ext c{f.a, f_.zero()};
    f_.sub(c.b, f_.zero(), f.b);
    ext_sqr(c, c);
    f_.mul(c.a, c.a, norm);
    f_.mul(c.b, c.b, norm);
    return ext_pow(c, cofactor);
  }

  // Miller loop for f_{n,A} evaluated at phi(B) = (-x_B, i*y_B). Line values
  // are scaled by F_P factors, which the final exponentiation removes.
  Ext miller(const Aff& a, const Aff& b, const mpz_class& order) {
    Ext acc = ext_one();
    Ext line;
    Jac t{a.x, a.y, f_.one(), false};
    E xa_plus_xb, z3, m, tmp;
    f_.add(xa_plus_xb, a.x, b.x);
    const mpz_srcptr n = order.get_mpz_t();
    for (long i = static_cast<long>(mpz_sizeinbase(n, 2)) - 2; i >= 0; --i) {
      f_.mul(zz_, t.Z, t.Z);
      f_.mul(xx_, t.X, t.X);
      f_.mul(yy_, t.Y, t.Y);
      f_.add(m, xx_, xx_);
      f_.add(m, m, xx_);
      f_.mul(tmp, zz_, zz_);
      f_.add(m, m, tmp);
      f_.mul(z3, t.Y, t.Z);
      f_.add(z3, z3, z3);
      f_.mul(tmp, b.x, zz_);
      f_.add(tmp, tmp, t.X);
      f_.mul(tmp, m, tmp);
      f_.add(line.a, yy_, yy_);
      f_.sub(line.a, tmp, line.a);
      f_.mul(line.b, b.y, z3);
      f_.mul(line.b, line.b, zz_);
      ext_sqr(acc, acc);
      ext_mul(acc, acc, line);
      dbl(t);

      if (mpz_tstbit(n, static_cast<mp_bitcnt_t>(i))) {
        f_.mul(zz_, t.Z, t.Z);
        f_.mul(u2_, a.x, zz_);
        f_.mul(s2_, a.y, t.Z);
        f_.mul(s2_, s2_, zz_);
        f_.sub(h_, u2_, t.X);
        f_.sub(r_, s2_, t.Y);
        if (f_.is_zero(h_)) {
          // T = -A: vertical chord, value in F_P.
          t.inf = true;
          continue;
        }
        f_.mul(z3, t.Z, h_);
        f_.mul(line.a, r_, xa_plus_xb);
        f_.mul(tmp, a.y, z3);
        f_.sub(line.a, line.a, tmp);
        f_.mul(line.b, b.y, z3);
        ext_mul(acc, acc, line);
        add_affine(t, a);
      }
    }
    return acc;
  }

 private:
  const F& f_;
  E xx_, yy_, zz_, s_, m_, tmp_, u2_, s2_, h_, r_, hh_, hhh_, v_;
  E t0_, t1_, t2_, t3_;
};

template <class F>
class EngineImpl final : public Engine {
 public:
  EngineImpl(const mpz_class& field, const mpz_class& order, const mpz_class& cofactor, std::string name)
      : f_(field), order_(order), cofactor_(cofactor), name_(std::move(name)) {}

  std::string name() const override { return name_; }

  Point mul(const Point& base, const mpz_class& k) const override {
    Ops<F> ops(f_);
    auto a = ops.aff(base);
    typename Ops<F>::Jac t;
    for (long i = static_cast<long>(mpz_sizeinbase(k.get_mpz_t(), 2)) - 1; i >= 0; --i) {
      ops.dbl(t);
      if (mpz_tstbit(k.get_mpz_t(), static_cast<mp_bitcnt_t>(i))) ops.add_affine(t, a);
    }
    return ops.to_point(t);
  }

  Point sum(std::span<const Point* const> points) const override {
    Ops<F> ops(f_);
    typename Ops<F>::Jac t;
    for (const Point* p : points) ops.add_affine(t, ops.aff(*p));
    return ops.to_point(t);
  }

  Gt pair(const Point& a, const Point& b) const override {
    if (a.infinity || b.infinity) return Gt{1, 0};
    Ops<F> ops(f_);
    auto acc = ops.miller(ops.aff(a), ops.aff(b), order_);
    return ops.gt(ops.final_exp(acc, cofactor_));
  }

  Gt gt_mul(const Gt& a, const Gt& b) const override {
    Ops<F> ops(f_);
    auto x = ops.ext(a);
    ops.ext_mul(x, x, ops.ext(b));
    return ops.gt(x);
  }

  Gt gt_pow(const Gt& a, const mpz_class& k) const override {
    Ops<F> ops(f_);
    return ops.gt(ops.ext_pow(ops.ext(a), k));
  }

  Gt final_exponentiation(const Gt& a) const override {
    Ops<F> ops(f_);
    return ops.gt(ops.final_exp(ops.ext(a), cofactor_));
  }

 private:
  F f_;
  mpz_class order_;
  mpz_class cofactor_;
  std::string name_;
};

std::shared_ptr<const Engine> make_engine(const mpz_class& field, const mpz_class& order,
                                          const mpz_class& cofactor) {
  const std::size_t limbs = (mpz_sizeinbase(field.get_mpz_t(), 2) + 63) / 64;
  auto mont = [&]<std::size_t N>() -> std::shared_ptr<const Engine> {
    return std::make_shared<EngineImpl<MontField<N>>>(field, order, cofactor, "montgomery-" + std::to_string(N));
  };
  switch (limbs) {
    case 1: return mont.template operator()<1>();
    case 2: return mont.template operator()<2>();
    case 3: return mont.template operator()<3>();
    case 4: return mont.template operator()<4>();
    case 5: return mont.template operator()<5>();
    case 6: return mont.template operator()<6>();
    case 7: return mont.template operator()<7>();
    case 8: return mont.template operator()<8>();
    default: return std::make_shared<EngineImpl<MpzField>>(field, order, cofactor, "gmp");
  }
}

}  // namespace detail

std::shared_ptr<const CompositeGroup> CompositeGroup::generate(unsigned bits, crypto::Drbg& rng) {
  if (bits < 32 || bits % 2 != 0 || bits > 4096) {
    throw Error(ErrorCode::kInvalidArgument, "group size must be an even bit count in [32, 4096]");
  }
  std::shared_ptr<CompositeGroup> grp(new CompositeGroup());
  grp->bits_ = bits;
  const unsigned half = bits / 2;
  grp->p_ = bigint::random_prime(rng, half);
  do {
    grp->q_ = bigint::random_prime(rng, half);
  } while (grp->q_ == grp->p_);
  grp->n_ = grp->p_ * grp->q_;

  // P = h*n - 1 with h = 0 mod 4 gives P = 3 mod 4 because n is odd.
  for (unsigned long h = 4;; h += 4) {
    mpz_class candidate = grp->n_ * h - 1;
    if (mpz_probab_prime_p(candidate.get_mpz_t(), 40) != 0) {
      grp->field_ = candidate;
      grp->cofactor_ = h;
      break;
    }
    if (h > 1'000'000) throw Error(ErrorCode::kCrypto, "no suitable field prime found");
  }
  grp->sqrt_exp_ = (grp->field_ + 1) / 4;
  grp->field_bytes_ = bigint::byte_length(grp->field_);
  grp->engine_ = detail::make_engine(grp->field_, grp->n_, grp->cofactor_);

  for (int attempt = 0; attempt < 10'000; ++attempt) {
    mpz_class x = bigint::uniform(rng, grp->field_);
    mpz_class rhs = (x * x * x + x) % grp->field_;
    if (rhs == 0 || mpz_legendre(rhs.get_mpz_t(), grp->field_.get_mpz_t()) != 1) continue;
    mpz_class y;
    mpz_powm(y.get_mpz_t(), rhs.get_mpz_t(), grp->sqrt_exp_.get_mpz_t(), grp->field_.get_mpz_t());
    Point g = grp->mul(Point{x, y, false}, grp->cofactor_);
    if (g.infinity) continue;
    if (grp->mul(g, grp->p_).infinity || grp->mul(g, grp->q_).infinity) continue;
    grp->g_ = g;
    grp->finish_init();
    return grp;
  }
  throw Error(ErrorCode::kCrypto, "failed to find a generator of order n");
}

void CompositeGroup::finish_init() {
  g_p_ = mul(g_, q_);
  g_q_ = mul(g_, p_);
  crypto::Digest d = crypto::sha256(serialize());
  std::memcpy(&fingerprint_, d.data(), sizeof(fingerprint_));
}

std::string CompositeGroup::backend_name() const { return engine_->name(); }

Bytes CompositeGroup::serialize() const {
  Bytes out;
  put_u32(out, bits_);
  put_blob(out, bigint::to_bytes(p_));
  put_blob(out, bigint::to_bytes(q_));
  put_blob(out, bigint::to_bytes(cofactor_));
  put_blob(out, bigint::to_bytes(g_.x));
  put_blob(out, bigint::to_bytes(g_.y));
  return out;
}

std::shared_ptr<const CompositeGroup> CompositeGroup::deserialize(ByteView bytes) {
  Reader in(bytes);
  std::shared_ptr<CompositeGroup> grp(new CompositeGroup());
  grp->bits_ = in.u32();
  grp->p_ = bigint::from_bytes(in.blob());
  grp->q_ = bigint::from_bytes(in.blob());
  grp->cofactor_ = bigint::from_bytes(in.blob());
  grp->n_ = grp->p_ * grp->q_;
  grp->field_ = grp->cofactor_ * grp->n_ - 1;
  if (grp->p_ < 3 || grp->q_ < 3 || grp->field_ % 4 != 3) throw Error(ErrorCode::kFormat, "invalid group parameters");
  grp->sqrt_exp_ = (grp->field_ + 1) / 4;
  grp->field_bytes_ = bigint::byte_length(grp->field_);
  grp->engine_ = detail::make_engine(grp->field_, grp->n_, grp->cofactor_);
  grp->g_ = Point{bigint::from_bytes(in.blob()), bigint::from_bytes(in.blob()), false};
  if (!in.done() || !grp->on_curve(grp->g_) || !grp->mul(grp->g_, grp->n_).infinity) {
    throw Error(ErrorCode::kFormat, "invalid group parameters");
  }
  grp->finish_init();
  return grp;
}

bool CompositeGroup::on_curve(const Point& pt) const {
  if (pt.infinity) return true;
  if (pt.x < 0 || pt.x >= field_ || pt.y < 0 || pt.y >= field_) return false;
  mpz_class lhs = (pt.y * pt.y) % field_;
  mpz_class rhs = (pt.x * pt.x * pt.x + pt.x) % field_;
  return lhs == rhs;
}

Point CompositeGroup::negate(const Point& a) const {
  if (a.infinity || a.y == 0) return a;
  return Point{a.x, field_ - a.y, false};
}

Point CompositeGroup::add(const Point& a, const Point& b) const {
  const Point* pts[] = {&a, &b};
  return engine_->sum(pts);
}

Point CompositeGroup::sum(std::span<const Point* const> points) const { return engine_->sum(points); }

Point CompositeGroup::mul(const Point& base, const mpz_class& k) const {
  if (base.infinity || k == 0) return Point::at_infinity();
  if (k < 0) return mul(negate(base), -k);
  return engine_->mul(base, k);
}

mpz_class CompositeGroup::random_exponent(crypto::Drbg& rng, const mpz_class& modulus) const {
  mpz_class v;
  do {
    v = bigint::uniform(rng, modulus);
  } while (v == 0);
  return v;
}

Point CompositeGroup::random_gp(crypto::Drbg& rng) const { return mul(g_p_, random_exponent(rng, p_)); }

Point CompositeGroup::random_gq(crypto::Drbg& rng) const { return mul(g_q_, random_exponent(rng, q_)); }

Gt CompositeGroup::pair(const Point& a, const Point& b) const { return engine_->pair(a, b); }

Gt CompositeGroup::gt_mul(const Gt& a, const Gt& b) const { return engine_->gt_mul(a, b); }

Gt CompositeGroup::gt_inverse(const Gt& a) const {
  mpz_class norm = (a.a * a.a + a.b * a.b) % field_;
  if (mpz_invert(norm.get_mpz_t(), norm.get_mpz_t(), field_.get_mpz_t()) == 0) {
    throw Error(ErrorCode::kCrypto, "G_T element is not invertible");
  }
  mpz_class ra = (a.a * norm) % field_;
  mpz_class rb = ((field_ - a.b) * norm) % field_;
  return Gt{ra, rb};
}

Gt CompositeGroup::gt_pow(const Gt& a, const mpz_class& k) const {
  if (k < 0) return gt_pow(gt_inverse(a), -k);
  return engine_->gt_pow(a, k);
}

Gt CompositeGroup::hash_to_gt(ByteView data) const {
  const Gt one = gt_one();
  for (std::uint32_t ctr = 0;; ++ctr) {
    Bytes seed(data.begin(), data.end());
    put_u32(seed, ctr);
    crypto::Drbg expand{ByteView(seed)};
    Gt z{bigint::uniform(expand, field_), bigint::uniform(expand, field_)};
    if (z.a == 0 && z.b == 0) continue;
    Gt t = engine_->final_exponentiation(z);
    if (!(t == one)) return t;
  }
}

void CompositeGroup::encode(Bytes& out, const Point& pt) const {
  out.push_back(pt.infinity ? 0 : 1);
  Bytes x = bigint::to_bytes(pt.infinity ? mpz_class(0) : pt.x, field_bytes_);
  Bytes y = bigint::to_bytes(pt.infinity ? mpz_class(0) : pt.y, field_bytes_);
  out.insert(out.end(), x.begin(), x.end());
  out.insert(out.end(), y.begin(), y.end());
}

void CompositeGroup::encode(Bytes& out, const Gt& v) const {
  Bytes a = bigint::to_bytes(v.a, field_bytes_);
  Bytes b = bigint::to_bytes(v.b, field_bytes_);
  out.insert(out.end(), a.begin(), a.end());
  out.insert(out.end(), b.begin(), b.end());
}

Point CompositeGroup::decode_point(Reader& in) const {
  std::uint8_t flag = in.u8();
  Point pt;
  pt.x = bigint::from_bytes(in.take(field_bytes_));
  pt.y = bigint::from_bytes(in.take(field_bytes_));
  if (flag == 0) return Point::at_infinity();
  pt.infinity = false;
  if (flag != 1 || !on_curve(pt)) throw Error(ErrorCode::kFormat, "encoded point is not on the curve");
  return pt;
}

Gt CompositeGroup::decode_gt(Reader& in) const {
  Gt v;
  v.a = bigint::from_bytes(in.take(field_bytes_));
  v.b = bigint::from_bytes(in.take(field_bytes_));
  if (v.a >= field_ || v.b >= field_) throw Error(ErrorCode::kFormat, "encoded G_T element out of range");
  return v;
}

FixedBaseTable::FixedBaseTable(const CompositeGroup& group, const Point& base, unsigned max_scalar_bits)
    : base_(base) {
  const unsigned rows = (max_scalar_bits + kWindow - 1) / kWindow;
  rows_.resize(rows);
  Point row_base = base;
  for (unsigned j = 0; j < rows; ++j) {
    auto& row = rows_[j];
    row.resize(1u << kWindow);
    row[0] = Point::at_infinity();
    for (unsigned d = 1; d < row.size(); ++d) row[d] = group.add(row[d - 1], row_base);
    row_base = group.add(row[row.size() - 1], row_base);
  }
}

Point FixedBaseTable::mul(const CompositeGroup& group, const mpz_class& k) const {
  if (k < 0 || mpz_sizeinbase(k.get_mpz_t(), 2) > rows_.size() * kWindow) return group.mul(base_, k);
  std::vector<const Point*> picks;
  picks.reserve(rows_.size());
  for (std::size_t j = 0; j < rows_.size(); ++j) {
    unsigned digit = 0;
    for (unsigned b = 0; b < kWindow; ++b) {
      if (mpz_tstbit(k.get_mpz_t(), static_cast<mp_bitcnt_t>(j * kWindow + b))) digit |= 1u << b;
    }
    if (digit != 0) picks.push_back(&rows_[j][digit]);
  }
  return group.sum(picks);
}

}  // namespace geomarket::pairing
