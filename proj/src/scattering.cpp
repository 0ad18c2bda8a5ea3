// SPDX-License-Identifier: Apache-2.0
#include "atomdiode/scattering.hpp"

#include "atomdiode/errors.hpp"
#include "atomdiode/parallel.hpp"

#include <Eigen/Dense>
#include <unsupported/Eigen/MatrixFunctions>

#include <cmath>
#include <sstream>

namespace atomdiode {

namespace {

using Mat3 = Eigen::Matrix3cd;
using Mat6 = Eigen::Matrix<cplx, 6, 6>;
using Cols = Eigen::Matrix<cplx, 6, 3>;

constexpr cplx I{0.0, 1.0};

// Region outside of which every laser is below `negligible * energy`.
std::array<double, 2> interaction_region(const DiodeConfig& config, double energy, double negligible) {
    double lo = 0.0;
    double hi = 0.0;
    bool any = false;
    for (const LaserProfile* l : config.lasers()) {
        if (l->peak <= 0.0) continue;
        const double ratio = 0.5 * l->peak / (negligible * energy);
        const double reach = ratio > 1.0 ? l->sigma * std::sqrt(2.0 * std::log(ratio)) : 0.0;
        if (!any) {
            lo = l->center - reach;
            hi = l->center + reach;
            any = true;
        } else {
            lo = std::min(lo, l->center - reach);
            hi = std::max(hi, l->center + reach);
        }
    }
    if (!any) return {0.0, 0.0};
    return {lo, hi};
}

// Breakpoints from `from` to `to` (either direction): coarse steps outside the
// interaction region, fine steps inside.
std::vector<double> step_points(double from, double to, std::array<double, 2> region, double fine, double coarse) {
    const double dir = to > from ? 1.0 : -1.0;
    std::vector<double> cuts{from};
    auto inside = [&](double x) { return x > std::min(from, to) && x < std::max(from, to); };
    std::vector<double> marks;
    for (double r : region) {
        if (inside(r)) marks.push_back(r);
    }
    std::sort(marks.begin(), marks.end(), [dir](double a, double b) { return dir * a < dir * b; });
    for (double m : marks) cuts.push_back(m);
    cuts.push_back(to);

    std::vector<double> points{from};
    for (std::size_t s = 0; s + 1 < cuts.size(); ++s) {
        const double a = cuts[s];
        const double b = cuts[s + 1];
        const double mid = 0.5 * (a + b);
        const bool in_region = mid > region[0] && mid < region[1];
        const double h = in_region ? fine : coarse;
        const auto n = static_cast<std::size_t>(std::max(1.0, std::ceil(std::abs(b - a) / h)));
        for (std::size_t i = 1; i < n; ++i) points.push_back(a + (b - a) * static_cast<double>(i) / static_cast<double>(n));
        points.push_back(b);
    }
    return points;
}

class CoupledChannels {
public:
    CoupledChannels(const DiodeConfig& config, double energy, double k_ref)
        : config_(config), energy_(energy), k_ref_(k_ref), two_over_hm_(2.0 / config.params.hbar_over_m) {}

    Mat3 q_matrix(double x) const {
        Mat3 q = potential_at(x, config_);
        q.diagonal().array() -= energy_;
        return two_over_hm_ * q;
    }

    // Fourth-order Magnus propagator over [x, x + h] (h signed) for the first
    // order system (psi, psi'/k_ref)' = [[0, k_ref], [Q/k_ref, 0]] (psi, psi'/k_ref).
    Mat6 propagator(double x, double h) const {
        static const double c = std::sqrt(3.0) / 6.0;
        const Mat3 q1 = q_matrix(x + (0.5 - c) * h);
        const Mat3 q2 = q_matrix(x + (0.5 + c) * h);
        const double w = std::sqrt(3.0) / 12.0 * h * h;

        Mat6 omega;
        omega.topLeftCorner<3, 3>() = w * (q1 - q2);
        omega.topRightCorner<3, 3>() = Mat3::Identity() * cplx(h * k_ref_);
        omega.bottomLeftCorner<3, 3>() = (0.5 * h / k_ref_) * (q1 + q2);
        omega.bottomRightCorner<3, 3>() = w * (q2 - q1);
        return omega.exp();
    }

private:
    const DiodeConfig& config_;
    double energy_;
    double k_ref_;
    double two_over_hm_;
};

// Modified Gram-Schmidt in place; returns R^{-1} so that Y_old * R^{-1} = Y_new.
Mat3 orthonormalize(Cols& y) {
    Mat3 r = Mat3::Zero();
    for (int j = 0; j < 3; ++j) {
        for (int i = 0; i < j; ++i) {
            const cplx proj = y.col(i).dot(y.col(j));  // conj(col i) . col j
            r(i, j) = proj;
            y.col(j) -= proj * y.col(i);
        }
        const double norm = y.col(j).norm();
        r(j, j) = norm;
        y.col(j) /= norm;
    }
    return r.triangularView<Eigen::Upper>().solve(Mat3::Identity());
}

double check_speed(const ScatteringQuery& q) {
    if (!(q.speed > 0.0) || !std::isfinite(q.speed)) {
        throw Error(ErrorCategory::Config, "scattering speed must be > 0");
    }
    if (q.incident_channel < 1 || q.incident_channel > 3) {
        throw Error(ErrorCategory::Config, "incident channel must be 1, 2 or 3");
    }
    const auto& n = q.numerics;
    if (!(n.x_left < n.x_right) || !(n.step_um > 0.0) || !(n.far_step_um > 0.0)) {
        throw Error(ErrorCategory::Config, "invalid scattering numerics");
    }
    return q.speed;
}

}  // namespace

double ScatteringResult::reflection_probability(int channel) const {
    const int b = channel - 1;
    if (!open[b]) return 0.0;
    return std::norm(reflection[b]) * wavenumber[b].real() / wavenumber[incident_channel - 1].real();
}

double ScatteringResult::transmission_probability(int channel) const {
    const int b = channel - 1;
    if (!open[b]) return 0.0;
    return std::norm(transmission[b]) * wavenumber[b].real() / wavenumber[incident_channel - 1].real();
}

ScatteringResult scattering_amplitudes(const ScatteringQuery& query) {
    const double speed = check_speed(query);
    const auto& cfg = query.config;
    const auto& num = query.numerics;
    const double hm = cfg.params.hbar_over_m;
    const double energy = speed * speed / (2.0 * hm);  // E / hbar, 1/ms

    ScatteringResult result;
    result.speed = speed;
    result.side = query.side;
    result.incident_channel = query.incident_channel;

    const Mat3 v_inf = potential_at(std::numeric_limits<double>::infinity(), cfg);
    std::array<double, 3> anchor_start{};
    std::array<double, 3> anchor_end{};
    const bool from_left = query.side == Side::FromLeft;
    const double x_start = from_left ? num.x_right : num.x_left;
    const double x_end = from_left ? num.x_left : num.x_right;
    const double s = from_left ? 1.0 : -1.0;  // direction of the incident wave
    for (int b = 0; b < 3; ++b) {
        const cplx k2 = 2.0 * (energy - v_inf(b, b)) / hm;
        result.wavenumber[b] = std::sqrt(k2);
        result.open[b] = result.wavenumber[b].imag() == 0.0;
        anchor_start[b] = result.open[b] ? 0.0 : x_start;
        anchor_end[b] = result.open[b] ? 0.0 : x_end;
    }
    const int alpha = query.incident_channel - 1;
    const cplx k_inc = result.wavenumber[alpha];
    const double k_ref = std::abs(k_inc);

    // Pure transmitted columns on the far side.
    Cols y = Cols::Zero();
    for (int j = 0; j < 3; ++j) {
        const cplx k = result.wavenumber[j];
        const cplx wave = std::exp(I * s * k * (x_start - anchor_start[j]));
        y(j, j) = wave;
        y(3 + j, j) = I * s * k * wave / k_ref;
    }

    const CoupledChannels system(cfg, energy, k_ref);
    const auto region = interaction_region(cfg, energy, num.negligible);
    double max_im_k = 0.0;
    for (const cplx& k : result.wavenumber) max_im_k = std::max(max_im_k, std::abs(k.imag()));
    const double coarse = max_im_k > 0.0 ? std::min(num.far_step_um, 20.0 / max_im_k) : num.far_step_um;
    const auto points = step_points(x_start, x_end, region, num.step_um, std::max(coarse, num.step_um));

    Mat3 basis_change = Mat3::Identity();  // Y_initial * basis_change = Y_current, up to exp(log_scale)
    double log_scale = 0.0;
    for (std::size_t i = 0; i + 1 < points.size(); ++i) {
        y = system.propagator(points[i], points[i + 1] - points[i]) * y;
        if (!y.allFinite()) {
            std::ostringstream msg;
            msg << "non-finite solution at x = " << points[i + 1] << " um";
            throw Error(ErrorCategory::NonConvergence, msg.str());
        }
        basis_change = basis_change * orthonormalize(y);
        const double big = basis_change.cwiseAbs().maxCoeff();
        if (!(big > 0.0) || !std::isfinite(big)) {
            throw Error(ErrorCategory::NonConvergence, "column basis degenerated during marching");
        }
        basis_change /= big;
        log_scale += std::log(big);
    }

    // Decompose each column into incident and reflected waves on the incidence side.
    Mat3 incoming;
    Mat3 reflected;
    for (int j = 0; j < 3; ++j) {
        for (int b = 0; b < 3; ++b) {
            const cplx k = result.wavenumber[b];
            const cplx psi = y(b, j);
            const cplx dpsi_over_isk = y(3 + b, j) * k_ref / (I * s * k);
            const cplx phase = std::exp(I * s * k * (x_end - anchor_end[b]));
            incoming(b, j) = 0.5 * (psi + dpsi_over_isk) / phase;
            reflected(b, j) = 0.5 * (psi - dpsi_over_isk) * phase;
        }
    }

    // Subnormal entries (decayed closed-channel components) make the SVD
    // rotations produce NaN; they carry no information at this scale.
    const double peak = incoming.cwiseAbs().maxCoeff();
    incoming = incoming.unaryExpr([peak](const cplx& z) { return std::abs(z) < 1e-200 * peak ? cplx{} : z; });
    const Eigen::JacobiSVD<Mat3> svd(incoming);
    const auto& sv = svd.singularValues();
    result.condition_number = sv(2) > 0.0 ? sv(0) / sv(2) : std::numeric_limits<double>::infinity();
    if (!(result.condition_number <= num.max_condition)) {
        std::ostringstream msg;
        msg << "matching system condition number " << result.condition_number << " exceeds "
            << num.max_condition;
        throw Error(ErrorCategory::IllConditionedMatching, msg.str());
    }

    Eigen::Vector3cd rhs = Eigen::Vector3cd::Zero();
    rhs(alpha) = 1.0;
    const Eigen::Vector3cd coeff = incoming.fullPivLu().solve(rhs);
    const Eigen::Vector3cd refl = reflected * coeff;
    const double scale = log_scale > -745.0 ? std::exp(log_scale) : 0.0;
    const Eigen::Vector3cd trans = (basis_change * coeff) * scale;
    for (int b = 0; b < 3; ++b) {
        result.reflection[b] = refl(b);
        result.transmission[b] = trans(b);
    }
    if (!refl.allFinite() || !trans.allFinite()) {
        throw Error(ErrorCategory::NonConvergence, "non-finite scattering amplitudes");
    }
    return result;
}

double flux_deficit(const ScatteringResult& result) {
    double flux = 0.0;
    for (int ch = 1; ch <= 3; ++ch) {
        flux += result.reflection_probability(ch) + result.transmission_probability(ch);
    }
    return 1.0 - flux;
}

std::vector<ScatteringResult> velocity_scan(const DiodeConfig& config, Side side, int incident_channel,
                                            std::span<const double> speeds, const ScatteringNumerics& numerics,
                                            int workers) {
    std::vector<ScatteringResult> results(speeds.size());
    parallel_for(speeds.size(), workers, [&](std::size_t i) {
        ScatteringQuery q;
        q.speed = speeds[i];
        q.side = side;
        q.incident_channel = incident_channel;
        q.config = config;
        q.numerics = numerics;
        try {
            results[i] = scattering_amplitudes(q);
        } catch (const Error& e) {
            std::ostringstream msg;
            msg << "at speed " << speeds[i] << " um/ms: " << e.what();
            throw Error(e.category(), msg.str());
        }
    });
    return results;
}

}  // namespace atomdiode
