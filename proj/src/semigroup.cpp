#include "kmsd/semigroup.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <random>
#include <sstream>

#include <Eigen/Eigenvalues>

namespace kmsd {

namespace {

constexpr double kFloor = -1e-9;

double hermitian_op_norm(const Matrix& m)
{
    Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (m + m.adjoint()), Eigen::EigenvaluesOnly);
    const RealVector& ev = es.eigenvalues();
    return std::max(std::abs(ev[0]), std::abs(ev[ev.size() - 1]));
}

RealVector hermitian_eigenvalues(const Matrix& m)
{
    Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (m + m.adjoint()), Eigen::EigenvaluesOnly);
    return es.eigenvalues();
}

void require_time(double t)
{
    if (!(t >= 0.0) || !std::isfinite(t)) throw SpecError("semigroup time must be finite and nonnegative");
}

Matrix heat_kernel(const Matrix& h0, double t)
{
    Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (h0 + h0.adjoint()));
    const RealVector e = (-t * es.eigenvalues().array()).exp();
    return es.eigenvectors() * e.asDiagonal() * es.eigenvectors().adjoint();
}

}  // namespace

Index Spectrum::count(double lambda, double tol) const
{
    const double cut = lambda + tol;
    return std::upper_bound(eigenvalues.data(), eigenvalues.data() + eigenvalues.size(), cut) - eigenvalues.data();
}

Spectrum compute_spectrum(const Matrix& dense)
{
    const double scale = std::max(1.0, dense.norm());
    if ((dense - dense.adjoint()).norm() > 1e-10 * scale) throw SpecError("compute_spectrum: operator is not self-adjoint");
    const Matrix h = 0.5 * (dense + dense.adjoint());
    Eigen::SelfAdjointEigenSolver<Matrix> es(h);
    if (es.info() != Eigen::Success) throw ConditioningError("eigensolver did not converge");
    Spectrum s;
    s.eigenvalues = es.eigenvalues();
    s.eigenvectors = es.eigenvectors();
    const Matrix rebuilt = s.eigenvectors * s.eigenvalues.asDiagonal() * s.eigenvectors.adjoint();
    const double hn = std::max(std::abs(s.eigenvalues[0]), std::abs(s.eigenvalues[s.eigenvalues.size() - 1]));
    s.reconstruction_residual = (rebuilt - h).norm() / std::max(1.0, hn);
    return s;
}

SemigroupHandle::SemigroupHandle(SuperOperator h, const StandardFormContext& ctx, std::string label)
    : h_(std::move(h)), ctx_(std::make_shared<StandardFormContext>(ctx)), label_(std::move(label))
{
    if (h_.dim() != ctx.dim()) throw SpecError("generator does not match the context dimension");
    spectrum_ = compute_spectrum(h_.dense());
}

SemigroupHandle SemigroupHandle::from_generator(const DirichletGenerator& gen)
{
    return SemigroupHandle(gen.h(), gen.context(), "H[" + gen.x().label + "]");
}

SemigroupHandle SemigroupHandle::from_h0(const Matrix& h0, const StandardFormContext& ctx)
{
    if ((h0 - h0.adjoint()).norm() > 1e-10 * std::max(1.0, h0.norm())) throw SpecError("H0 must be Hermitian");
    SemigroupHandle out(SuperOperator::left(h0) + SuperOperator::right(h0), ctx, "G0");
    out.h0_ = h0;
    return out;
}

SemigroupHandle SemigroupHandle::from_superoperator(SuperOperator h, const StandardFormContext& ctx, std::string label)
{
    return SemigroupHandle(std::move(h), ctx, std::move(label));
}

double SemigroupHandle::norm() const
{
    const RealVector& e = spectrum_.eigenvalues;
    return std::max(std::abs(e[0]), std::abs(e[e.size() - 1]));
}

Matrix SemigroupHandle::propagator(double t) const
{
    require_time(t);
    const RealVector e = (-t * spectrum_.eigenvalues.array()).exp();
    return spectrum_.eigenvectors * e.asDiagonal() * spectrum_.eigenvectors.adjoint();
}

HSVector SemigroupHandle::evolve(double t, const HSVector& xi) const
{
    require_time(t);
    if (xi.dim() != dim()) throw SpecError("evolve: dimension mismatch");
    const Eigen::VectorXcd c = spectrum_.eigenvectors.adjoint() * vec(xi.matrix());
    const Eigen::VectorXcd e = (-t * spectrum_.eigenvalues.array()).exp().cast<Complex>().matrix();
    return HSVector(unvec(spectrum_.eigenvectors * e.cwiseProduct(c), dim()));
}

HSVector SemigroupHandle::evolve_closed_form(double t, const HSVector& xi) const
{
    require_time(t);
    if (!h0_) throw SpecError("closed-form evolution needs a handle built from H0");
    const Matrix k = heat_kernel(*h0_, t);
    return HSVector(k * xi.matrix() * k);
}

double SemigroupHandle::residual_on_xi0() const
{
    return h_.apply(ctx_->xi0()).norm();
}

bool SemigroupHandle::conservative(double tol) const
{
    return residual_on_xi0() <= tol * std::max(1.0, norm());
}

double heat_trace(const SemigroupHandle& handle, double t)
{
    if (!(t > 0.0)) throw SpecError("heat_trace requires t > 0");
    return (-t * handle.spectrum().eigenvalues.array()).exp().sum();
}

Report semigroup_law_check(const SemigroupHandle& handle, double s, double t, int samples, std::uint64_t seed)
{
    require_time(s);
    require_time(t);
    std::mt19937_64 rng(seed);
    const Index d = handle.dim();
    double law = 0.0, contract = -std::numeric_limits<double>::infinity(), closed = 0.0;
    std::vector<double> continuity(3, 0.0);
    const double steps[3] = {1e-2, 1e-4, 1e-6};
    for (int i = 0; i < samples; ++i) {
        Matrix g = random_gaussian(d, rng);
        const HSVector xi(g / g.norm());
        const HSVector tt = handle.evolve(t, xi);
        law = std::max(law, (handle.evolve(s + t, xi) - handle.evolve(s, tt)).norm());
        contract = std::max(contract, tt.norm() - xi.norm());
        for (int k = 0; k < 3; ++k) continuity[k] = std::max(continuity[k], (handle.evolve(steps[k], xi) - xi).norm());
        if (handle.h0()) closed = std::max(closed, (handle.evolve_closed_form(t, xi) - tt).norm());
    }
    const double hn = std::max(1.0, handle.norm());
    const bool continuous = continuity[2] <= continuity[1] && continuity[1] <= continuity[0] &&
                            continuity[2] <= 2e-6 * hn;

    Report rep;
    rep.check_id = "semigroup_law";
    rep.anchor = "semigroup.spectral-exponential";
    rep.parameters = {{"generator", handle.label()}, {"dim", d}, {"s", s}, {"t", t}, {"samples", samples},
                      {"seed", seed}};
    rep.add_residual("semigroup_law", law);
    rep.add_residual("contractivity_excess", samples > 0 ? contract : 0.0);
    rep.add_residual("continuity_at_1e-2", continuity[0]);
    rep.add_residual("continuity_at_1e-4", continuity[1]);
    rep.add_residual("continuity_at_1e-6", continuity[2]);
    rep.add_residual("spectral_reconstruction", handle.spectrum().reconstruction_residual);
    rep.add_residual("generator_on_xi0", handle.residual_on_xi0());
    if (handle.h0()) rep.add_residual("closed_form_vs_spectral", closed);
    rep.tolerance = 1e-10;
    const bool ok = law <= rep.tolerance && (samples == 0 || contract <= 1e-12) && continuous &&
                    handle.spectrum().reconstruction_residual <= 1e-10 && closed <= 1e-11;
    rep.status = verdict(ok);
    return rep;
}

Report markov_check(const SemigroupHandle& handle, double t, int samples, std::uint64_t seed)
{
    require_time(t);
    const StandardFormContext& ctx = handle.context();
    const Index d = handle.dim();
    const bool conservative = handle.conservative();
    std::mt19937_64 rng(seed);

    double lower = std::numeric_limits<double>::infinity();
    double upper = std::numeric_limits<double>::infinity();
    double psd = std::numeric_limits<double>::infinity();
    auto order_sample = [&](const HSVector& xi) {
        const HSVector tx = handle.evolve(t, xi);
        lower = std::min(lower, min_eigenvalue(tx.matrix()));
        upper = std::min(upper, min_eigenvalue(ctx.xi0().matrix() - tx.matrix()));
    };
    order_sample(ctx.xi0());
    order_sample(HSVector(Matrix::Zero(d, d)));
    for (int i = 0; i < samples; ++i) {
        order_sample(order_interval_image(ctx, random_psd(d, rng, 0.0, 1.0)));
        const Matrix p = random_psd(d, rng, 0.0, 10.0);
        psd = std::min(psd, min_eigenvalue(handle.evolve(t, HSVector(p)).matrix()));
    }
    const double fixed_point = (handle.evolve(t, ctx.xi0()) - ctx.xi0()).norm();

    Report rep;
    rep.check_id = "markov";
    rep.anchor = "semigroup.order-interval-preservation";
    rep.parameters = {{"generator", handle.label()}, {"dim", d}, {"t", t}, {"samples", samples}, {"seed", seed},
                      {"conservative", conservative}};
    rep.add_residual("min_eig_T_xi", lower);
    rep.add_residual("min_eig_xi0_minus_T_xi", upper);
    rep.add_residual("min_eig_T_psd", samples > 0 ? psd : 0.0);
    rep.add_residual("T_xi0_minus_xi0", fixed_point);
    rep.tolerance = -kFloor;
    bool ok = lower >= kFloor && (samples == 0 || psd >= kFloor);
    if (conservative) {
        ok = ok && upper >= kFloor;
    } else {
        rep.note = "not conservative: upper order bound reported, not asserted";
    }
    rep.status = verdict(ok);
    return rep;
}

Matrix choi_matrix(const Matrix& dense, Index dim)
{
    const Index n = dim * dim;
    if (dense.rows() != n || dense.cols() != n) throw SpecError("choi_matrix: size is not dim^2");
    Matrix choi(n, n);
    // Choi = sum_pq E_pq (x) T(E_pq); T(E_pq)(j, k) = M(j + k d, p + q d)
    for (Index p = 0; p < dim; ++p)
        for (Index j = 0; j < dim; ++j)
            for (Index q = 0; q < dim; ++q)
                for (Index k = 0; k < dim; ++k) choi(p * dim + j, q * dim + k) = dense(j + k * dim, p + q * dim);
    return choi;
}

Report cp_check(const SemigroupHandle& handle, double t)
{
    const Matrix choi = choi_matrix(handle.propagator(t), handle.dim());
    const double cn = hermitian_op_norm(choi);
    const double floor = min_eigenvalue(choi);

    Report rep;
    rep.check_id = "complete_positivity";
    rep.anchor = "semigroup.complete-positivity-choi";
    rep.parameters = {{"generator", handle.label()}, {"dim", handle.dim()}, {"t", t}};
    rep.add_residual("min_eig_choi", floor);
    rep.add_residual("choi_norm", cn);
    rep.add_residual("choi_hermiticity", (choi - choi.adjoint()).norm());
    rep.tolerance = 1e-9 * cn;
    rep.status = verdict(floor >= -rep.tolerance);
    return rep;
}

namespace {

std::vector<HSVector> hermitian_samples(Index d, int samples, std::uint64_t seed)
{
    std::mt19937_64 rng(seed);
    std::vector<HSVector> out;
    out.reserve(samples);
    for (int i = 0; i < samples; ++i) out.push_back(random_hermitian_unit(d, rng));
    return out;
}

void require_conditioning(const StandardFormContext& ctx)
{
    if (ctx.max_inverse_quarter() > kInverseQuarterWarning) {
        std::ostringstream os;
        os << "rho^{-1/4} is ill-conditioned (max factor " << ctx.max_inverse_quarter() << ")";
        throw ConditioningError(os.str());
    }
}

// ||x||_op / ||xi||_HS for x = rho^{-1/4} T_t xi rho^{-1/4}
double superbounded_ratio(const SemigroupHandle& handle, double t, const HSVector& xi)
{
    const HSVector tx = handle.h0() ? handle.evolve_closed_form(t, xi) : handle.evolve(t, xi);
    const RealVector& q = handle.context().inverse_quarter();
    const Matrix x = q.asDiagonal() * tx.matrix() * q.asDiagonal();
    return hermitian_op_norm(x) / xi.norm();
}

}  // namespace

Report superbounded_check(const SemigroupHandle& handle, double t, int samples, std::uint64_t seed)
{
    require_time(t);
    require_conditioning(handle.context());
    const auto xs = hermitian_samples(handle.dim(), samples, seed);
    double worst = 0.0;
    int passed = 0;
    for (const auto& xi : xs) {
        const double r = superbounded_ratio(handle, t, xi);
        worst = std::max(worst, r);
        if (r <= 1.0 + 1e-8) ++passed;
    }

    Report rep;
    rep.check_id = "superbounded";
    rep.anchor = "semigroup.superboundedness";
    rep.parameters = {{"generator", handle.label()}, {"dim", handle.dim()}, {"t", t}, {"samples", samples},
                      {"seed", seed}};
    rep.add_residual("max_ratio", worst);
    rep.add_residual("samples_passed", passed);
    if (handle.h0()) {
        // sup over the HS unit ball is ||B||^2 with B = rho^{-1/4} exp(-tH0),
        // attained on a rank-one projector
        const Matrix b = handle.context().inverse_quarter().asDiagonal() * heat_kernel(*handle.h0(), t);
        const double bn = spectral_norm(b);
        rep.add_residual("exact_worst_case_ratio", bn * bn);
    }
    rep.tolerance = 1e-8;
    rep.status = verdict(passed == samples);
    return rep;
}

Report superbounded_threshold_scan(const SemigroupHandle& handle, const std::vector<double>& grid, int samples,
                                   std::uint64_t seed, std::optional<double> expected_bound)
{
    require_conditioning(handle.context());
    if (grid.empty()) throw SpecError("threshold scan needs a non-empty time grid");
    if (!std::is_sorted(grid.begin(), grid.end())) throw SpecError("threshold scan grid must be ascending");
    for (double t : grid) require_time(t);
    const auto xs = hermitian_samples(handle.dim(), samples, seed);

    std::vector<int> passed(grid.size(), 0);
    std::vector<double> worst(grid.size(), 0.0);
    for (std::size_t i = 0; i < grid.size(); ++i) {
        for (const auto& xi : xs) {
            const double r = superbounded_ratio(handle, grid[i], xi);
            worst[i] = std::max(worst[i], r);
            if (r <= 1.0 + 1e-8) ++passed[i];
        }
    }
    bool monotone = true;
    for (std::size_t i = 1; i < grid.size(); ++i) monotone = monotone && passed[i] >= passed[i - 1];

    std::optional<double> threshold;
    for (std::size_t i = grid.size(); i-- > 0;) {
        if (passed[i] != samples) break;
        threshold = grid[i];
    }

    Report rep;
    rep.check_id = "superbounded_threshold_scan";
    rep.anchor = "semigroup.superboundedness-threshold";
    rep.parameters = {{"generator", handle.label()}, {"dim", handle.dim()}, {"samples", samples}, {"seed", seed},
                      {"grid", grid}};
    if (expected_bound) rep.parameters["expected_bound"] = *expected_bound;
    rep.add_residual("empirical_threshold", threshold ? *threshold : std::numeric_limits<double>::infinity());
    rep.add_residual("monotone_pass_rate", monotone ? 1.0 : 0.0);
    for (std::size_t i = 0; i < grid.size(); ++i) {
        std::ostringstream name;
        name << "pass_rate@t=" << grid[i];
        rep.add_residual(name.str(), samples > 0 ? static_cast<double>(passed[i]) / samples : 1.0);
    }
    for (std::size_t i = 0; i < grid.size(); ++i) {
        std::ostringstream name;
        name << "max_ratio@t=" << grid[i];
        rep.add_residual(name.str(), worst[i]);
    }
    rep.tolerance = 1e-8;
    bool ok = monotone && threshold.has_value();
    if (!threshold) rep.note = "no threshold found";
    else if (expected_bound && *threshold > *expected_bound) {
        ok = false;
        rep.note = "empirical threshold above the expected bound";
    }
    if (!monotone) rep.note = "pass rate is not monotone in t";
    rep.status = verdict(ok);
    return rep;
}

Report counting_bound_check(const Matrix& h0)
{
    if (h0.rows() != h0.cols()) throw SpecError("H0 must be square");
    if ((h0 - h0.adjoint()).norm() > 1e-10 * std::max(1.0, h0.norm())) throw SpecError("H0 must be Hermitian");
    const Index d = h0.rows();
    const RealVector eh = hermitian_eigenvalues(h0);
    std::vector<double> pairs;
    pairs.reserve(d * d);
    for (Index j = 0; j < d; ++j)
        for (Index k = 0; k < d; ++k) pairs.push_back(eh[j] + eh[k]);
    std::sort(pairs.begin(), pairs.end());

    const SuperOperator g0 = SuperOperator::left(h0) + SuperOperator::right(h0);
    const RealVector eg = hermitian_eigenvalues(g0.dense());
    const double scale = std::max(1.0, std::max(std::abs(eh[0]), std::abs(eh[d - 1])));
    const double tol = 1e-10 * scale;
    double multiset = 0.0;
    for (Index i = 0; i < eg.size(); ++i) multiset = std::max(multiset, std::abs(eg[i] - pairs[i]));

    auto count = [tol](const RealVector& v, double l) {
        return static_cast<long>(std::upper_bound(v.data(), v.data() + v.size(), l + tol) - v.data());
    };
    const double l0 = eh[0];
    long worst_excess = std::numeric_limits<long>::min();
    double worst_at = 0.0;
    for (Index i = 0; i < eg.size(); ++i) {
        const long ng = count(eg, eg[i]);
        const long nh = count(eh, eg[i] - l0);
        if (ng - nh * nh > worst_excess) {
            worst_excess = ng - nh * nh;
            worst_at = eg[i];
        }
    }

    Report rep;
    rep.check_id = "counting_bound";
    rep.anchor = "semigroup.counting-function-bound";
    rep.parameters = {{"dim", d}, {"lambda0", l0}};
    rep.add_residual("pairwise_sum_vs_dense_spectrum", multiset);
    rep.add_residual("max_count_excess", static_cast<double>(worst_excess));
    rep.add_residual("worst_lambda", worst_at);
    rep.tolerance = tol;
    rep.status = verdict(multiset <= tol && worst_excess <= 0);
    return rep;
}

RealVector ladder_q_closed_form(int m, double beta, int dim)
{
    if (m < 1) throw SpecError("ladder power must be >= 1");
    if (!(beta > 0.0)) throw SpecError("beta must be positive");
    const double l2 = std::exp(-m * beta / 2.0);
    RealVector q(dim);
    for (int k = 0; k < dim; ++k) {
        double rising = 1.0, falling = 1.0;
        for (int i = 0; i < m; ++i) {
            rising *= k + 1 + i;
            falling *= k - i;
        }
        q[k] = (l2 - 1.0) * rising + (1.0 / l2 - 1.0) * falling;
    }
    return q;
}

Report q_slope_check(const FockSpec& spec)
{
    spec.validate();
    if (spec.dim < 4) throw SpecError("q_slope_check needs dim >= 4");
    const double lambda = std::exp(-spec.beta / 4.0);
    const Matrix q = q_operator(ladder_power(spec, 1), lambda).matrix;
    const double expected = std::pow(2.0 * std::sinh(spec.beta / 4.0), 2);
    const RealVector closed = ladder_q_closed_form(1, spec.beta, spec.dim);
    double slope_dev = 0.0, closed_dev = 0.0, off_diag = 0.0;
    // X^*X = AA^* is exact on 0..dim-2, so slopes use k+1 <= dim-2
    for (int k = 0; k + 1 <= spec.dim - 2; ++k)
        slope_dev = std::max(slope_dev, std::abs((q(k + 1, k + 1) - q(k, k)).real() - expected));
    for (int k = 0; k <= spec.dim - 2; ++k) closed_dev = std::max(closed_dev, std::abs(q(k, k).real() - closed[k]));
    off_diag = (q - Matrix(q.diagonal().asDiagonal())).norm();

    Report rep;
    rep.check_id = "q_slope";
    rep.anchor = "semigroup.q-operator-leading-coefficient";
    rep.parameters = {{"dim", spec.dim}, {"beta", spec.beta}, {"m", 1}, {"expected_slope", expected}};
    rep.add_residual("max_slope_deviation", slope_dev);
    rep.add_residual("closed_form_deviation", closed_dev);
    rep.add_residual("off_diagonal_norm", off_diag);
    rep.boundary_indices = {spec.dim - 1};
    rep.tolerance = 1e-10;
    rep.status = verdict(slope_dev <= rep.tolerance && closed_dev <= rep.tolerance && off_diag == 0.0);
    return rep;
}

Report heat_trace_check(const FockSpec& spec, int m, double t)
{
    const GibbsData gibbs = gibbs_data(spec);
    const StandardFormContext ctx(gibbs);
    const AffiliatedOperator x = ladder_power(spec, m);
    const double lambda = std::exp(-m * spec.beta / 4.0);
    const DirichletGenerator gen = DirichletGenerator::from_lambda(x, lambda, ctx);
    const SemigroupHandle handle = SemigroupHandle::from_generator(gen);
    const double ht = heat_trace(handle, t);

    const RealVector q = ladder_q_closed_form(m, spec.beta, spec.dim);
    const double single = (-t * q.array()).exp().sum();
    const double bound = single * single;

    const Matrix qt = q_operator(x, lambda).matrix;
    const RealVector eq = hermitian_eigenvalues(qt);
    const double trunc_single = (-t * eq.array()).exp().sum();
    const RealVector eqj = hermitian_eigenvalues(q_superop(x, lambda).dense());
    const double trunc_pair = (-t * eqj.array()).exp().sum();
    const double factorization = std::abs(trunc_pair - trunc_single * trunc_single) / (trunc_single * trunc_single);

    Report rep;
    rep.check_id = "heat_trace";
    rep.anchor = "semigroup.heat-trace-bound";
    rep.parameters = {{"dim", spec.dim}, {"beta", spec.beta}, {"m", m}, {"t", t}, {"lambda", lambda}};
    rep.add_residual("heat_trace", ht);
    rep.add_residual("closed_form_bound", bound);
    rep.add_residual("slack", bound - ht);
    rep.add_residual("truncated_q_pair_trace", trunc_pair);
    rep.add_residual("pair_trace_factorization", factorization);
    rep.tolerance = 1e-10;
    const bool ok = ht <= bound * (1.0 + 1e-12) && ht <= trunc_pair * (1.0 + 1e-12) && factorization <= rep.tolerance;
    rep.status = verdict(ok);
    return rep;
}

void write_spectrum_csv(const std::string& path, const Spectrum& s)
{
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << "index,eigenvalue\n" << std::setprecision(17);
    for (Index i = 0; i < s.eigenvalues.size(); ++i) out << i << ',' << s.eigenvalues[i] << '\n';
}

void write_counting_csv(const std::string& path, const Spectrum& s)
{
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << "lambda,count\n" << std::setprecision(17);
    const RealVector& e = s.eigenvalues;
    for (Index i = 0; i < e.size(); ++i) {
        if (i + 1 < e.size() && e[i + 1] - e[i] <= 1e-10 * std::max(1.0, std::abs(e[i]))) continue;
        out << e[i] << ',' << i + 1 << '\n';
    }
}

}  // namespace kmsd
