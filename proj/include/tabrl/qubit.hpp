#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <numbers>
#include <vector>

#include "tabrl/errors.hpp"
#include "tabrl/rng.hpp"

namespace tabrl {

using Complex = std::complex<double>;

inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

/// Normalized single-qubit pure state (|amp0|^2 + |amp1|^2 = 1 within 1e-12).
class QubitState {
  public:
    QubitState(Complex amp0, Complex amp1) : amp0_(amp0), amp1_(amp1) {
        if (std::abs(std::norm(amp0_) + std::norm(amp1_) - 1.0) > 1e-12)
            throw std::invalid_argument("qubit state is not normalized");
    }

    static QubitState ket0() { return {1.0, 0.0}; }
    static QubitState ket1() { return {0.0, 1.0}; }

    Complex amp0() const { return amp0_; }
    Complex amp1() const { return amp1_; }

  private:
    Complex amp0_;
    Complex amp1_;
};

/// 2x2 unitary (U^dagger U = I within 1e-12 entrywise, checked at
/// construction). Entries are stored row-major.
class Unitary2 {
  public:
    Unitary2(Complex u00, Complex u01, Complex u10, Complex u11)
        : u_{u00, u01, u10, u11} {
        // U^dagger U entries
        Complex d00 = std::conj(u00) * u00 + std::conj(u10) * u10;
        Complex d01 = std::conj(u00) * u01 + std::conj(u10) * u11;
        Complex d10 = std::conj(u01) * u00 + std::conj(u11) * u10;
        Complex d11 = std::conj(u01) * u01 + std::conj(u11) * u11;
        if (std::abs(d00 - 1.0) > 1e-12 || std::abs(d11 - 1.0) > 1e-12 ||
            std::abs(d01) > 1e-12 || std::abs(d10) > 1e-12)
            throw std::invalid_argument("matrix is not unitary");
    }

    static Unitary2 identity() { return {1.0, 0.0, 0.0, 1.0}; }

    Complex at(int row, int col) const { return u_[row * 2 + col]; }

    friend Unitary2 operator*(const Unitary2& a, const Unitary2& b) {
        return {a.at(0, 0) * b.at(0, 0) + a.at(0, 1) * b.at(1, 0),
                a.at(0, 0) * b.at(0, 1) + a.at(0, 1) * b.at(1, 1),
                a.at(1, 0) * b.at(0, 0) + a.at(1, 1) * b.at(1, 0),
                a.at(1, 0) * b.at(0, 1) + a.at(1, 1) * b.at(1, 1)};
    }

  private:
    std::array<Complex, 4> u_;
};

/// X-axis rotation exp(-i (theta/2) sigma_x):
///   [[cos(theta/2), -i sin(theta/2)], [-i sin(theta/2), cos(theta/2)]].
inline Unitary2 rx(double theta) {
    double c = std::cos(theta / 2.0);
    double s = std::sin(theta / 2.0);
    return {Complex(c, 0.0), Complex(0.0, -s), Complex(0.0, -s),
            Complex(c, 0.0)};
}

/// U |psi>, renormalized. Norm drift beyond 1e-9 indicates a corrupted
/// unitary and is an internal error.
inline QubitState apply(const Unitary2& u, const QubitState& psi) {
    Complex a0 = u.at(0, 0) * psi.amp0() + u.at(0, 1) * psi.amp1();
    Complex a1 = u.at(1, 0) * psi.amp0() + u.at(1, 1) * psi.amp1();
    double norm = std::sqrt(std::norm(a0) + std::norm(a1));
    if (std::abs(norm - 1.0) > 1e-9)
        throw std::logic_error("unitary application drifted the state norm");
    return {a0 / norm, a1 / norm};
}

/// |<target|psi>|^2, in [0, 1]; 1 means identical up to global phase.
inline double fidelity(const QubitState& psi, const QubitState& target) {
    Complex overlap = std::conj(target.amp0()) * psi.amp0() +
                      std::conj(target.amp1()) * psi.amp1();
    return std::norm(overlap);
}

struct BlochVector {
    double x;
    double y;
    double z;
};

/// Bloch-sphere coordinates of a pure state.
inline BlochVector bloch(const QubitState& psi) {
    Complex cross = std::conj(psi.amp0()) * psi.amp1();
    return {2.0 * cross.real(), 2.0 * cross.imag(),
            std::norm(psi.amp0()) - std::norm(psi.amp1())};
}

inline double wrap_angle(double theta) {
    double t = std::fmod(theta, kTwoPi);
    return t < 0.0 ? t + kTwoPi : t;
}

/// Gaussian policy over the rotation angle plus a scalar reward baseline.
/// The task has a single fixed state, so this two-parameter actor and
/// one-number critic realize the actor/critic pair.
class GaussianActor {
  public:
    GaussianActor(double mu, double sigma, double alpha, double beta)
        : mu_(wrap_angle(mu)), log_sigma_(std::log(sigma)), alpha_(alpha),
          beta_(beta) {
        if (sigma <= 0.0) throw std::invalid_argument("sigma must be positive");
    }

    double mu() const { return mu_; }
    double sigma() const { return std::exp(log_sigma_); }
    double log_sigma() const { return log_sigma_; }
    double baseline() const { return baseline_; }
    double alpha() const { return alpha_; }
    double beta() const { return beta_; }

    void set_mu(double mu) { mu_ = wrap_angle(mu); }
    void set_log_sigma(double v) { log_sigma_ = v; }
    void set_baseline(double v) { baseline_ = v; }

    double log_prob(double theta) const {
        double z = (theta - mu_) / sigma();
        return -0.5 * z * z - log_sigma_ - 0.5 * std::log(kTwoPi);
    }

    /// d log pi / d mu = (theta - mu) / sigma^2.
    double grad_mu(double theta) const {
        return (theta - mu_) / (sigma() * sigma());
    }

    /// d log pi / d log sigma = (theta - mu)^2 / sigma^2 - 1.
    double grad_log_sigma(double theta) const {
        double z = (theta - mu_) / sigma();
        return z * z - 1.0;
    }

  private:
    double mu_;
    double log_sigma_;
    double alpha_;
    double beta_;
    double baseline_ = 0.0;
};

struct QubitTrainResult {
    GaussianActor actor;
    std::vector<double> fidelity_history;  // sampled reward per episode
    double final_fidelity = 0.0;
};

/// Learns the rotation angle driving `initial` to `target`. Each episode is
/// one action: sample theta ~ N(mu, sigma), score it by fidelity, update the
/// baseline toward the reward and both actor parameters along the advantage-
/// weighted log-density gradient.
///
/// Two stabilizers on top of the plain updates: sigma is clamped to
/// [0.02, sigma_0] (exploration never exceeds its initial scale and the
/// density never degenerates), and the reported mu is the circular mean of
/// the iterates over the last half of training, since the final iterate
/// keeps a jitter of order 1/sqrt(episodes) that the average cancels. The
/// reported fidelity is the deterministic fidelity at that mu.
inline QubitTrainResult train_qubit_controller(const QubitState& initial,
                                               const QubitState& target,
                                               const GaussianActor& actor0,
                                               long episodes, Rng& rng) {
    if (episodes < 1) throw std::invalid_argument("episodes must be >= 1");
    QubitTrainResult res{actor0, {}, 0.0};
    GaussianActor& actor = res.actor;
    const double sigma_cap = actor0.sigma();
    const double sigma_floor = std::min(0.02, sigma_cap);

    long tail_start = episodes / 2;
    double tail_cos = 0.0, tail_sin = 0.0;

    for (long e = 0; e < episodes; ++e) {
        double sigma = actor.sigma();
        double theta = rng.normal(actor.mu(), sigma);
        double reward = fidelity(apply(rx(theta), initial), target);
        res.fidelity_history.push_back(reward);

        double advantage = reward - actor.baseline();
        actor.set_baseline(actor.baseline() +
                           actor.beta() * (reward - actor.baseline()));

        double d_mu = actor.alpha() * advantage * actor.grad_mu(theta);
        double d_ls = actor.alpha() * advantage * actor.grad_log_sigma(theta);
        actor.set_mu(actor.mu() + d_mu);
        actor.set_log_sigma(std::clamp(actor.log_sigma() + d_ls,
                                       std::log(sigma_floor),
                                       std::log(sigma_cap)));

        if (e >= tail_start) {
            tail_cos += std::cos(actor.mu());
            tail_sin += std::sin(actor.mu());
        }
    }

    actor.set_mu(std::atan2(tail_sin, tail_cos));
    res.final_fidelity = fidelity(apply(rx(actor.mu()), initial), target);
    return res;
}

} // namespace tabrl
