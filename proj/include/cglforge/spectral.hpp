#pragma once

#include <unsupported/Eigen/FFT>
#include <array>
#include <vector>

#include "model.hpp"

namespace cglforge {

inline int wavenumber(int j, int G) { return j <= G / 2 ? j : j - G; }

inline int next_pow2(int v) {
  int p = 1;
  while (p < v) p <<= 1;
  return p;
}

// Full spectra are n x G complex matrices, column j holding mode wavenumber(j, G);
// physical fields are n x G real matrices on xi_j = 2 pi j / G. u(xi) = sum_eta U(eta) e^{i eta xi}.
class Spectral {
 public:
  explicit Spectral(int G) : G_(G), buf_in_(G), buf_out_(G) {}
  int size() const { return G_; }

  Rmat to_physical(const Cmat& spec) {
    Rmat out(spec.rows(), G_);
    for (Eigen::Index i = 0; i < spec.rows(); ++i) {
      for (int j = 0; j < G_; ++j) buf_in_[j] = spec(i, j);
      fft_.inv(buf_out_, buf_in_);
      for (int j = 0; j < G_; ++j) out(i, j) = buf_out_[j].real() * G_;
    }
    return out;
  }

  Cmat to_spectral(const Rmat& phys) {
    Cmat out(phys.rows(), G_);
    for (Eigen::Index i = 0; i < phys.rows(); ++i) {
      for (int j = 0; j < G_; ++j) buf_in_[j] = phys(i, j);
      fft_.fwd(buf_out_, buf_in_);
      for (int j = 0; j < G_; ++j) out(i, j) = buf_out_[j] / static_cast<double>(G_);
    }
    return out;
  }

  // complex-valued physical samples (used for amplitude fields)
  Cmat to_physical_complex(const Cmat& spec) {
    Cmat out(spec.rows(), G_);
    for (Eigen::Index i = 0; i < spec.rows(); ++i) {
      for (int j = 0; j < G_; ++j) buf_in_[j] = spec(i, j);
      fft_.inv(buf_out_, buf_in_);
      for (int j = 0; j < G_; ++j) out(i, j) = buf_out_[j] * static_cast<double>(G_);
    }
    return out;
  }
  Cmat to_spectral_complex(const Cmat& phys) {
    Cmat out(phys.rows(), G_);
    for (Eigen::Index i = 0; i < phys.rows(); ++i) {
      for (int j = 0; j < G_; ++j) buf_in_[j] = phys(i, j);
      fft_.fwd(buf_out_, buf_in_);
      for (int j = 0; j < G_; ++j) out(i, j) = buf_out_[j] / static_cast<double>(G_);
    }
    return out;
  }

 private:
  int G_;
  Eigen::FFT<double> fft_;
  std::vector<cplx> buf_in_, buf_out_;
};

// d_x^order in spectral space with d_x = q d_xi; the Nyquist mode is dropped for odd orders.
inline Cmat spectral_derivative(const Cmat& spec, double q, int order) {
  const int G = static_cast<int>(spec.cols());
  Cmat out(spec.rows(), G);
  for (int j = 0; j < G; ++j) {
    int w = wavenumber(j, G);
    cplx f = std::pow(I1 * (q * w), order);
    if (order % 2 == 1 && G % 2 == 0 && j == G / 2) f = 0.0;
    out.col(j) = f * spec.col(j);
  }
  return out;
}

// Re-sample a full spectrum onto a grid of a different size (zero padding or truncation).
inline Cmat resize_spectrum(const Cmat& spec, int G2) {
  const int G = static_cast<int>(spec.cols());
  Cmat out = Cmat::Zero(spec.rows(), G2);
  int K = std::min((G - 1) / 2, (G2 - 1) / 2);
  for (int w = -K; w <= K; ++w) out.col((w + G2) % G2) = spec.col((w + G) % G);
  return out;
}

inline Cmat full_from_half(const Cmat& half, int G) {
  const int N = static_cast<int>(half.cols()) - 1;
  Cmat full = Cmat::Zero(half.rows(), G);
  full.col(0) = half.col(0).real().cast<cplx>();
  for (int e = 1; e <= N; ++e) {
    full.col(e) = half.col(e);
    full.col(G - e) = half.col(e).conjugate();
  }
  return full;
}

inline Cmat half_from_full(const Cmat& full, int N) { return full.leftCols(N + 1); }

// Pointwise Jacobian fields: D N(U) V = M0 V + M1 V_x + M2 V_xx, each stored as
// (n*n) x G with row i*n + l.
struct JacobianFields {
  std::array<Rmat, 3> M;
  int used = 1;  // number of active fields
};

class NonlinearOperator {
 public:
  NonlinearOperator(const ModelSpec& m, double mu, double q) : m_(m), mu_(mu), q_(q) {
    if (m.is_quasilinear()) {
      const auto& ql = std::get<Quasilinear>(m.nonlinearity);
      ustar_ = ql.equilibrium(mu);
      std::vector<double> x(m.n + 1);
      for (int i = 0; i < m.n; ++i) x[i] = ustar_(i);
      x[m.n] = mu;
      hs_ = ql.h.eval(x.data(), 1);
      fs_ = ql.f.eval(x.data(), 1);
      gs_ = ql.g.eval(x.data(), 1);
    }
  }

  const ModelSpec& model() const { return m_; }
  double q() const { return q_; }
  double mu() const { return mu_; }
  bool needs_derivatives() const { return m_.is_quasilinear(); }
  bool pseudospectral() const {
    if (!m_.is_multilinear()) return true;
    const auto& ml = std::get<Multilinear>(m_.nonlinearity);
    return ml.pointwise.has_value();
  }
  cplx output_filter(double k) const {
    if (!m_.is_multilinear()) return 1.0;
    const auto& ml = std::get<Multilinear>(m_.nonlinearity);
    return ml.filter ? ml.filter(k) : cplx(1.0);
  }

  // Pointwise nonlinearity at one collocation point (x-derivatives given).
  Rvec point(const Rvec& U, const Rvec& Ux, const Rvec& Uxx) const {
    const int n = m_.n;
    std::vector<double> x(n + 1);
    x[n] = mu_;
    if (m_.is_semilinear()) {
      const auto& sl = std::get<Semilinear>(m_.nonlinearity);
      if (sl.poly) {
        for (int i = 0; i < n; ++i) x[i] = U(i);
        auto v = sl.poly->eval(x.data(), 0);
        return Eigen::Map<const Rvec>(v.v.data(), n);
      }
      return sl.N(U, mu_);
    }
    if (m_.is_multilinear()) {
      const auto& ml = std::get<Multilinear>(m_.nonlinearity);
      for (int i = 0; i < n; ++i) x[i] = U(i);
      auto v = ml.pointwise->eval(x.data(), 0);
      return Eigen::Map<const Rvec>(v.v.data(), n);
    }
    const auto& ql = std::get<Quasilinear>(m_.nonlinearity);
    for (int i = 0; i < n; ++i) x[i] = ustar_(i) + U(i);
    auto h = ql.h.eval(x.data(), 1);
    auto f = ql.f.eval(x.data(), 1);
    auto g = ql.g.eval(x.data(), 0);
    Rvec out(n);
    for (int i = 0; i < n; ++i) {
      double s = g.val(i);
      for (int j = 0; j < n; ++j) {
        s -= gs_.D1(i, j) * U(j);
        s += (h.val(i * n + j) - hs_.val(i * n + j)) * Uxx(j);
        s += (f.D1(i, j) - fs_.D1(i, j)) * Ux(j);
        for (int k = 0; k < n; ++k) s += h.D1(i * n + j, k) * Ux(k) * Ux(j);
      }
      out(i) = s;
    }
    return out;
  }

  // Pointwise derivative fields at one collocation point.
  void point_jacobian(const Rvec& U, const Rvec& Ux, const Rvec& Uxx, Rmat& M0, Rmat& M1, Rmat& M2) const {
    const int n = m_.n;
    M0 = Rmat::Zero(n, n);
    M1 = Rmat::Zero(n, n);
    M2 = Rmat::Zero(n, n);
    std::vector<double> x(n + 1);
    x[n] = mu_;
    if (m_.is_semilinear() || m_.is_multilinear()) {
      const PolyJet* jet = nullptr;
      if (m_.is_semilinear()) {
        const auto& sl = std::get<Semilinear>(m_.nonlinearity);
        if (sl.poly) jet = &*sl.poly;
        else if (sl.jacobian) {
          M0 = sl.jacobian(U, mu_);
          return;
        } else {
          for (int l = 0; l < n; ++l) {
            Rvec e = Rvec::Zero(n);
            double h = 1e-6 * std::max(1.0, std::abs(U(l)));
            e(l) = h;
            M0.col(l) = (sl.N(U + e, mu_) - sl.N(U - e, mu_)) / (2.0 * h);
          }
          return;
        }
      } else {
        jet = &*std::get<Multilinear>(m_.nonlinearity).pointwise;
      }
      for (int i = 0; i < n; ++i) x[i] = U(i);
      auto v = jet->eval(x.data(), 1);
      for (int i = 0; i < n; ++i)
        for (int l = 0; l < n; ++l) M0(i, l) = v.D1(i, l);
      return;
    }
    const auto& ql = std::get<Quasilinear>(m_.nonlinearity);
    for (int i = 0; i < n; ++i) x[i] = ustar_(i) + U(i);
    auto h = ql.h.eval(x.data(), 2);
    auto f = ql.f.eval(x.data(), 2);
    auto g = ql.g.eval(x.data(), 1);
    for (int i = 0; i < n; ++i)
      for (int l = 0; l < n; ++l) {
        double s = g.D1(i, l) - gs_.D1(i, l);
        for (int j = 0; j < n; ++j) {
          s += h.D1(i * n + j, l) * Uxx(j);
          s += f.D2(i, j, l) * Ux(j);
          for (int k = 0; k < n; ++k) s += h.D2(i * n + j, k, l) * Ux(j) * Ux(k);
        }
        M0(i, l) = s;
        double s1 = f.D1(i, l) - fs_.D1(i, l);
        for (int j = 0; j < n; ++j) s1 += h.D1(i * n + j, l) * Ux(j) + h.D1(i * n + l, j) * Ux(j);
        M1(i, l) = s1;
        M2(i, l) = h.val(i * n + l) - hs_.val(i * n + l);
      }
  }

  // N(U) for a full spectrum evaluated on the grid of `sp` (the caller pads for dealiasing).
  Cmat apply(const Cmat& spec, Spectral& sp) const {
    const int G = sp.size();
    const int n = m_.n;
    if (!pseudospectral()) return apply_convolution(spec);
    Rmat U = sp.to_physical(spec);
    Rmat Ux = Rmat::Zero(n, G), Uxx = Rmat::Zero(n, G);
    if (needs_derivatives()) {
      Ux = sp.to_physical(spectral_derivative(spec, q_, 1));
      Uxx = sp.to_physical(spectral_derivative(spec, q_, 2));
    }
    Rmat P(n, G);
    for (int j = 0; j < G; ++j) P.col(j) = point(U.col(j), Ux.col(j), Uxx.col(j));
    Cmat out = sp.to_spectral(P);
    if (m_.is_multilinear())
      for (int j = 0; j < G; ++j) out.col(j) *= output_filter(q_ * wavenumber(j, G));
    return out;
  }

  JacobianFields fields(const Cmat& spec, Spectral& sp) const {
    const int G = sp.size();
    const int n = m_.n;
    Rmat U = sp.to_physical(spec);
    Rmat Ux = Rmat::Zero(n, G), Uxx = Rmat::Zero(n, G);
    if (needs_derivatives()) {
      Ux = sp.to_physical(spectral_derivative(spec, q_, 1));
      Uxx = sp.to_physical(spectral_derivative(spec, q_, 2));
    }
    JacobianFields jf;
    jf.used = needs_derivatives() ? 3 : 1;
    for (int p = 0; p < 3; ++p) jf.M[p] = Rmat::Zero(n * n, G);
    Rmat M0, M1, M2;
    for (int j = 0; j < G; ++j) {
      point_jacobian(U.col(j), Ux.col(j), Uxx.col(j), M0, M1, M2);
      for (int i = 0; i < n; ++i)
        for (int l = 0; l < n; ++l) {
          jf.M[0](i * n + l, j) = M0(i, l);
          jf.M[1](i * n + l, j) = M1(i, l);
          jf.M[2](i * n + l, j) = M2(i, l);
        }
    }
    return jf;
  }

  // Fourier-space Jacobian of N: rows eta = 0..N, columns eta' = -N..N (block n x n each),
  // at the state given by half-spectrum `half` (eta = 0..N) on a grid of size G.
  Cmat fourier_jacobian(const Cmat& half, Spectral& sp) const {
    const int n = m_.n;
    const int N = static_cast<int>(half.cols()) - 1;
    const int G = sp.size();
    Cmat J = Cmat::Zero(n * (N + 1), n * (2 * N + 1));
    if (!pseudospectral()) return convolution_jacobian(half);
    Cmat spec = full_from_half(half, G);
    JacobianFields jf = fields(spec, sp);
    std::array<Cmat, 3> Mh;
    for (int p = 0; p < jf.used; ++p) Mh[p] = sp.to_spectral(jf.M[p]);
    for (int e = 0; e <= N; ++e) {
      cplx filt = output_filter(q_ * e);
      for (int ep = -N; ep <= N; ++ep) {
        int d = e - ep;
        int col = ((d % G) + G) % G;
        Cmat B = Cmat::Zero(n, n);
        for (int p = 0; p < jf.used; ++p) {
          cplx fac = std::pow(I1 * (q_ * ep), p);
          for (int i = 0; i < n; ++i)
            for (int l = 0; l < n; ++l) B(i, l) += fac * Mh[p](i * n + l, col);
        }
        J.block(e * n, (ep + N) * n, n, n) = filt * B;
      }
    }
    return J;
  }

 private:
  // Direct evaluation through the Fourier multipliers for unfactored multilinear models.
  Cmat apply_convolution(const Cmat& spec) const {
    const auto& ml = std::get<Multilinear>(m_.nonlinearity);
    const int G = static_cast<int>(spec.cols());
    const int n = m_.n;
    std::vector<int> act;
    for (int j = 0; j < G; ++j)
      if (spec.col(j).norm() > 0.0) act.push_back(j);
    Cmat out = Cmat::Zero(n, G);
    for (int a : act)
      for (int b : act) {
        int wa = wavenumber(a, G), wb = wavenumber(b, G);
        int w = wa + wb;
        if (std::abs(w) > (G - 1) / 2) continue;
        out.col((w + G) % G) += ml.Q(q_ * wa, q_ * wb, spec.col(a), spec.col(b));
        for (int c : act) {
          int wc = wavenumber(c, G);
          int w3 = w + wc;
          if (std::abs(w3) > (G - 1) / 2) continue;
          out.col((w3 + G) % G) += ml.C(q_ * wa, q_ * wb, q_ * wc, spec.col(a), spec.col(b), spec.col(c));
        }
      }
    return out;
  }

  Cmat convolution_jacobian(const Cmat& half) const {
    const auto& ml = std::get<Multilinear>(m_.nonlinearity);
    const int n = m_.n;
    const int N = static_cast<int>(half.cols()) - 1;
    auto mode = [&](int e) -> Cvec {
      if (std::abs(e) > N) return Cvec::Zero(n);
      return e >= 0 ? Cvec(half.col(e)) : Cvec(half.col(-e).conjugate());
    };
    Cmat J = Cmat::Zero(n * (N + 1), n * (2 * N + 1));
    for (int e = 0; e <= N; ++e)
      for (int ep = -N; ep <= N; ++ep)
        for (int l = 0; l < n; ++l) {
          Cvec v = Cvec::Zero(n);
          v(l) = 1.0;
          int r = e - ep;
          Cvec col = Cvec::Zero(n);
          if (std::abs(r) <= N) {
            Cvec u = mode(r);
            col += ml.Q(q_ * ep, q_ * r, v, u) + ml.Q(q_ * r, q_ * ep, u, v);
          }
          for (int e2 = -N; e2 <= N; ++e2) {
            int e3 = r - e2;
            if (std::abs(e3) > N) continue;
            Cvec u2 = mode(e2), u3 = mode(e3);
            col += ml.C(q_ * ep, q_ * e2, q_ * e3, v, u2, u3) + ml.C(q_ * e2, q_ * ep, q_ * e3, u2, v, u3) +
                   ml.C(q_ * e2, q_ * e3, q_ * ep, u2, u3, v);
          }
          J.block(e * n, (ep + N) * n + l, n, 1) = col;
        }
    return J;
  }

  const ModelSpec& m_;
  double mu_, q_;
  Rvec ustar_;
  PolyJet::Values hs_, fs_, gs_;
};

}  // namespace cglforge
