#include "stark/construct.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include "stark/errors.hpp"

namespace stark {

namespace {

std::string join_csv(const std::vector<double>& v) {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) s += ",";
        s += format_double(v[i]);
    }
    return s;
}

std::vector<double> parse_csv(const std::string& s) {
    std::vector<double> out;
    std::string item;
    std::istringstream is(s);
    while (std::getline(is, item, ',')) {
        if (item.find_first_not_of(" \t") == std::string::npos) continue;
        out.push_back(parse_double(item));
    }
    return out;
}

PruferTrajectory integrate_frame(const EffectivePotential& Q, double xi0, double xi1,
                                 double theta0, double logR0, double tol, bool modified) {
    return modified ? integrate_modified(Q, xi0, xi1, theta0, logR0, tol)
                    : integrate(Q, xi0, xi1, theta0, logR0, tol);
}

// breakpoints of the critical schedule
double critical_breakpoint(int n) {
    return std::pow(2.0, (4.0 / M_PI) * n * n * n);
}

// merge a continuation piece's realized V, pairing the joint when values jump
void merge_v(std::vector<double>& xs, std::vector<double>& vs, const GridFunction& piece) {
    std::size_t start = 0;
    if (!xs.empty()) {
        const double x0 = piece.node(0);
        if (x0 <= xs.back()) {
            if (piece.value(0) == vs.back()) {
                start = 1;  // duplicate joint node with equal value
            } else {
                xs.push_back(xs.back() * (1.0 + 1e-12));
                vs.push_back(piece.value(0));
                start = 1;
            }
        }
    }
    for (std::size_t i = start; i < piece.size(); ++i) {
        xs.push_back(piece.node(i));
        vs.push_back(piece.value(i));
    }
}

}  // namespace

// ------------------------------------------------------------------- plan

std::vector<double> ConstructionPlan::junctions() const {
    std::vector<double> J{anchor};
    const double N = static_cast<double>(energies.size());
    for (double T : blocks) J.push_back(J.back() + N * T);
    return J;
}

void ConstructionPlan::validate() const {
    if (energies.empty()) throw std::invalid_argument("plan: no energies");
    if (boundary_angles.size() != energies.size())
        throw std::invalid_argument("plan: angle/energy count mismatch");
    for (std::size_t i = 0; i < energies.size(); ++i)
        for (std::size_t j = i + 1; j < energies.size(); ++j)
            if (energies[i] == energies[j])
                throw std::invalid_argument("plan: energies must be pairwise distinct");
    for (double th : boundary_angles)
        if (!(th >= 0.0 && th <= M_PI))
            throw std::invalid_argument("plan: boundary angles must lie in [0, pi]");
    if (!(M > 0.0)) throw std::invalid_argument("plan: M must be positive");
    if (blocks.empty()) throw std::invalid_argument("plan: no blocks");
    for (double T : blocks)
        if (!(T > 0.0)) throw std::invalid_argument("plan: block lengths must be positive");
    if (!(anchor >= 1.0)) throw std::invalid_argument("plan: anchor must be >= 1");
}

static const char* kind_name(ConstructionPlan::Kind k) {
    switch (k) {
        case ConstructionPlan::Kind::Single: return "single";
        case ConstructionPlan::Kind::Finite: return "finite";
        case ConstructionPlan::Kind::InfinitePrefix: return "infinite-prefix";
    }
    return "finite";
}

void ConstructionPlan::save(std::ostream& os) const {
    os << "# construction-plan\n";
    os << "kind = " << kind_name(kind) << "\n";
    os << "energies = " << join_csv(energies) << "\n";
    os << "angles = " << join_csv(boundary_angles) << "\n";
    os << "M = " << format_double(M) << "\n";
    os << "epsilon = " << format_double(epsilon) << "\n";
    os << "anchor = " << format_double(anchor) << "\n";
    os << "blocks = " << join_csv(blocks) << "\n";
    os << "envelope_budget = " << format_double(envelope_budget) << "\n";
    os << "safety = " << format_double(safety) << "\n";
}

void ConstructionPlan::save_file(const std::string& path) const {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("plan: cannot open " + path);
    save(os);
}

ConstructionPlan ConstructionPlan::load(std::istream& is) {
    ConstructionPlan plan;
    std::string line;
    while (std::getline(is, line)) {
        if (line.empty() || line[0] == '#') continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) continue;
        auto trim = [](std::string s) {
            const auto a = s.find_first_not_of(" \t");
            const auto b = s.find_last_not_of(" \t\r");
            return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
        };
        const std::string key = trim(line.substr(0, eq));
        const std::string val = trim(line.substr(eq + 1));
        if (key == "kind") {
            if (val == "single") plan.kind = Kind::Single;
            else if (val == "infinite-prefix") plan.kind = Kind::InfinitePrefix;
            else plan.kind = Kind::Finite;
        } else if (key == "energies") plan.energies = parse_csv(val);
        else if (key == "angles") plan.boundary_angles = parse_csv(val);
        else if (key == "M") plan.M = parse_double(val);
        else if (key == "epsilon") plan.epsilon = parse_double(val);
        else if (key == "anchor") plan.anchor = parse_double(val);
        else if (key == "blocks") plan.blocks = parse_csv(val);
        else if (key == "envelope_budget") plan.envelope_budget = parse_double(val);
        else if (key == "safety") plan.safety = parse_double(val);
    }
    return plan;
}

ConstructionPlan ConstructionPlan::load_file(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("plan: cannot open " + path);
    return load(is);
}

// --------------------------------------------------------------- schedules

ConstructionPlan schedule_finite(std::vector<double> energies, std::vector<double> angles,
                                 int W, const StarkFrame& frame) {
    const std::size_t N = energies.size();
    if (N < 2)
        throw std::invalid_argument("schedule_finite: need N >= 2 (use construct_single)");
    if (W < 1) throw std::invalid_argument("schedule_finite: need W >= 1");

    ConstructionPlan plan;
    plan.kind = ConstructionPlan::Kind::Finite;
    plan.energies = std::move(energies);
    plan.boundary_angles = std::move(angles);
    plan.epsilon = 1.0 / std::sqrt(std::log(static_cast<double>(N)));
    plan.M = 1.0 / 6.0 + 1.0 / (6.0 * plan.epsilon);
    for (int w = 1; w <= W; ++w)
        plan.blocks.push_back(std::pow(static_cast<double>(N), (1.0 + plan.epsilon) * w));
    plan.envelope_budget = (2.0 - frame.alpha) *
                           std::exp(2.0 * std::sqrt(std::log(static_cast<double>(N)))) *
                           static_cast<double>(N);
    plan.validate();
    return plan;
}

ConstructionPlan schedule_infinite_prefix(std::vector<double> energies,
                                          std::vector<double> angles,
                                          const std::function<double(double)>& h, int W,
                                          const StarkFrame& frame) {
    const std::size_t N = energies.size();
    if (N < 1) throw std::invalid_argument("schedule_infinite_prefix: no energies");
    if (W < 1) throw std::invalid_argument("schedule_infinite_prefix: need W >= 1");

    constexpr double kMCap = 100.0;  // reference per-block coupling
    constexpr double kMFloor = 0.5;  // below this the prefix makes no progress
    constexpr double kMaxAnchor = 2e5;
    const double rho = 1.0;  // block-to-junction length ratio T_w = J_{w-1}

    const double qexp = 1.0 - 0.5 * frame.alpha;
    auto fitted_M = [&](double xi) {
        const double x = x_of_xi(xi, frame);
        const double fac = 1.0 + std::pow(x, -qexp);
        const double allowed = h(x) / fac;  // cap on sup x^{1-alpha/2}|q|
        // envelope of a glued block: (1+alpha/2) * 4M * (1 + (N-1) rho)
        return 0.95 * allowed /
               (2.0 * (2.0 + frame.alpha) * (1.0 + (static_cast<double>(N) - 1.0) * rho));
    };

    double anchor = 1.0;
    double M = 0.0;
    bool found = false;
    for (; anchor <= kMaxAnchor; anchor *= 1.25) {
        // the first block binds when h is nondecreasing; check all starts anyway
        double m = kMCap;
        double J = anchor;
        for (int w = 1; w <= W; ++w) {
            m = std::min(m, fitted_M(J));
            J += static_cast<double>(N) * J * rho;
        }
        if (m >= kMFloor) {
            M = std::min(kMCap, m);
            found = true;
            break;
        }
    }
    if (!found)
        throw ScheduleError(
            "schedule_infinite_prefix: h grows too slowly for a realizable prefix");

    ConstructionPlan plan;
    plan.kind = ConstructionPlan::Kind::InfinitePrefix;
    plan.energies = std::move(energies);
    plan.boundary_angles = std::move(angles);
    plan.M = M;
    plan.anchor = anchor;
    double J = anchor;
    for (int w = 1; w <= W; ++w) {
        plan.blocks.push_back(J * rho);
        J += static_cast<double>(N) * J * rho;
    }
    plan.validate();
    return plan;
}

double prefix_envelope_margin(const GridFunction& q, const std::function<double(double)>& h,
                              const StarkFrame& frame) {
    const double qexp = 1.0 - 0.5 * frame.alpha;
    double margin = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < q.size(); ++i) {
        const double x = q.node(i);
        const double lhs = (1.0 + std::pow(x, qexp)) * std::abs(q.value(i));
        margin = std::min(margin, h(x) - lhs);
    }
    return margin;
}

// ------------------------------------------------------------ single builds

SingleBuild construct_single(double E, double d, double theta0, double xi_max,
                             const StarkFrame& frame, double tol) {
    if (!(d > 0.0)) throw std::invalid_argument("construct_single: coupling must be positive");
    if (!(xi_max >= 1e3)) throw std::invalid_argument("construct_single: xi_max must be >= 1e3");

    CoupledOptions opts;
    opts.tol = tol;
    opts.modified = frame.alpha != 1.0;
    SgnCoupling c{[d](double) { return d; }};
    CoupledRun run = integrate_sign_coupled(E, c, frame, 1.0, xi_max, theta0, opts);

    GridFunction V = std::move(run.V);
    GridFunction q = q_from_V(V, frame);
    const double env = sup_weighted_q(q, frame);
    return SingleBuild{std::move(V),
                       std::move(q),
                       std::move(run.traj),
                       d,
                       env,
                       (2.0 + frame.alpha) * d,
                       {1.0},
                       {d},
                       xi_max,
                       false};
}

SingleBuild construct_single_critical(double E, double theta0, double xi_max,
                                      const StarkFrame& frame, double tol) {
    const double a2 = critical_breakpoint(2);
    if (!(xi_max >= a2))
        throw ScheduleError("construct_single_critical: xi_max must realize two blocks (>= " +
                            format_double(a2) + ")");
    const double d0 = critical_coupling(frame);
    const bool modified = frame.alpha != 1.0;

    // free run over [1, a_1], then coupled blocks
    const double a1 = critical_breakpoint(1);
    EffectivePotential Q0 = assemble_Q(nullptr, E, frame);
    PruferTrajectory traj = integrate_frame(Q0, 1.0, a1, theta0, 0.0, tol, modified);

    std::vector<double> vxs, vvs;
    std::vector<double> block_lo, block_d;
    bool truncated = false;
    for (int n = 1;; ++n) {
        const double lo = critical_breakpoint(n);
        double hi = critical_breakpoint(n + 1);
        if (lo >= xi_max) break;
        if (hi > xi_max) {
            hi = xi_max;
            truncated = true;
        }
        const double dn = d0 + 1.0 / n;
        block_lo.push_back(lo);
        block_d.push_back(dn);

        CoupledOptions opts;
        opts.tol = tol;
        opts.modified = modified;
        opts.logR0 = traj.back().logR;
        SgnCoupling c{[dn](double) { return dn; }};
        CoupledRun run =
            integrate_sign_coupled(E, c, frame, lo, hi, traj.back().theta, opts);
        traj.extend(run.traj);
        merge_v(vxs, vvs, run.V);
        if (hi >= xi_max) break;
    }

    GridFunction V(std::move(vxs), std::move(vvs), Interp::Linear, Domain::Xi);
    GridFunction q = q_from_V(V, frame);
    const double env = sup_weighted_q(q, frame);
    return SingleBuild{std::move(V), std::move(q), std::move(traj),
                       block_d.back(), env,
                       (2.0 + frame.alpha) * block_d.back(),
                       std::move(block_lo), std::move(block_d),
                       xi_max, truncated};
}

SchrodingerBuild construct_schrodinger_critical(double a, double theta0, double x_max,
                                                double tol) {
    if (!(a > 0.0)) throw std::invalid_argument("construct_schrodinger_critical: a must be > 0");
    const double k = 2.0 * a / M_PI;
    const double y_max = k * x_max;
    const double a2 = critical_breakpoint(2);
    if (!(y_max >= a2))
        throw ScheduleError("construct_schrodinger_critical: range must realize two blocks");

    StarkFrame dummy(1.0);  // flat runs ignore the frame terms
    EffectivePotential Q0 = EffectivePotential::flat(nullptr);
    PruferTrajectory traj = integrate(Q0, 1.0, critical_breakpoint(1), theta0, 0.0, tol);

    std::vector<double> vxs, vvs;
    std::vector<double> block_lo, block_xv;
    for (int n = 1;; ++n) {
        const double lo = critical_breakpoint(n);
        double hi = critical_breakpoint(n + 1);
        if (lo >= y_max) break;
        hi = std::min(hi, y_max);
        const double dn = 0.25 * M_PI + 1.0 / n;
        block_lo.push_back(lo);
        block_xv.push_back(2.0 * k * dn);

        CoupledOptions opts;
        opts.tol = tol;
        opts.flat = true;
        opts.logR0 = traj.back().logR;
        SgnCoupling c{[dn](double) { return dn; }};
        CoupledRun run =
            integrate_sign_coupled(0.0, c, dummy, lo, hi, traj.back().theta, opts);
        traj.extend(run.traj);
        merge_v(vxs, vvs, run.V);
        if (hi >= y_max) break;
    }

    // map the unit-frequency potential back: V(x) = k^2 W(k x)
    std::vector<double> xs(vxs.size()), vs(vvs.size());
    for (std::size_t i = 0; i < vxs.size(); ++i) {
        xs[i] = vxs[i] / k;
        vs[i] = k * k * vvs[i];
    }
    GridFunction Vx(std::move(xs), std::move(vs), Interp::Linear, Domain::X);
    return SchrodingerBuild{std::move(Vx), std::move(traj), k, a,
                            std::move(block_lo), std::move(block_xv), y_max};
}

// ------------------------------------------------------------------ pieces

void PieceSpec::validate() const {
    if (!(xi1 > xi0) || !(xi0 > b) || b < 0.0)
        throw std::invalid_argument("PieceSpec: need xi1 > xi0 > b >= 0");
    if (!(M >= 0.0)) throw std::invalid_argument("PieceSpec: M must be nonnegative");
    for (std::size_t i = 0; i < avoid.size(); ++i) {
        if (avoid[i] == E)
            throw std::invalid_argument("PieceSpec: target energy inside the avoid set");
        for (std::size_t j = i + 1; j < avoid.size(); ++j)
            if (avoid[i] == avoid[j])
                throw std::invalid_argument("PieceSpec: avoid set must be pairwise distinct");
    }
}

GridFunction mollify_endpoints(const GridFunction& V, double window) {
    const double lo = V.front(), hi = V.back();
    if (!(window > 0.0) || !(window < (hi - lo) / 10.0))
        throw std::invalid_argument("mollify_endpoints: window must be positive and < range/10");

    auto bump = [](double t) { return t <= 0.0 ? 0.0 : std::exp(-1.0 / t); };
    auto cut = [&](double t) {
        if (t <= 0.0) return 0.0;
        if (t >= 1.0) return 1.0;
        const double p = bump(t), q = bump(1.0 - t);
        return p / (p + q);
    };
    auto factor = [&](double x) { return cut((x - lo) / window) * cut((hi - x) / window); };

    std::vector<double> xs = V.grid();
    constexpr int kWindowNodes = 32;
    for (int j = 1; j < kWindowNodes; ++j) {
        xs.push_back(lo + window * j / kWindowNodes);
        xs.push_back(hi - window * j / kWindowNodes);
    }
    std::sort(xs.begin(), xs.end());
    xs.erase(std::unique(xs.begin(), xs.end()), xs.end());

    std::vector<double> vs(xs.size());
    for (std::size_t i = 0; i < xs.size(); ++i) vs[i] = V(xs[i]) * factor(xs[i]);
    return GridFunction(std::move(xs), std::move(vs), V.interp(), V.domain());
}

PieceOutcome construct_piece(const PieceSpec& spec, const StarkFrame& frame,
                             PieceBoundary target_bc, std::vector<PieceBoundary> passive_bc,
                             double tol) {
    spec.validate();
    if (passive_bc.size() != spec.avoid.size())
        throw std::invalid_argument("construct_piece: boundary data for every avoided energy");
    const bool modified = frame.alpha != 1.0;

    // realize the potential from the closed nonlinear solve for the target
    CoupledOptions opts;
    opts.tol = tol;
    opts.modified = modified;
    opts.logR0 = target_bc.logR;
    SinCoupling sc{spec.M, spec.b};
    CoupledRun run =
        integrate_sign_coupled(spec.E, sc, frame, spec.xi0, spec.xi1, target_bc.theta, opts);

    const double window = 0.01 * (spec.xi1 - spec.xi0);
    auto Vm = std::make_shared<GridFunction>(mollify_endpoints(run.V, window));

    // integrate everything over the mollified potential so the returned pair
    // (V, trajectories) is self-consistent
    EffectivePotential Qt = assemble_Q(Vm, spec.E, frame);
    PruferTrajectory target = integrate_frame(Qt, spec.xi0, spec.xi1, target_bc.theta,
                                              target_bc.logR, tol, modified);

    PieceOutcome out{GridFunction(*Vm), std::move(target), {}, 0, 0, 0, false};
    double passive_excess = 0.0;
    for (std::size_t j = 0; j < spec.avoid.size(); ++j) {
        EffectivePotential Qj = assemble_Q(Vm, spec.avoid[j], frame);
        PruferTrajectory tj = integrate_frame(Qj, spec.xi0, spec.xi1, passive_bc[j].theta,
                                              passive_bc[j].logR, tol, modified);
        double growth = 0.0;
        for (double lr : tj.logR) growth = std::max(growth, lr - tj.logR.front());
        passive_excess = std::max(passive_excess, growth);
        out.passive.push_back(std::move(tj));
    }

    const double ratio = (spec.xi1 - spec.b) / (spec.xi0 - spec.b);
    out.target_excess = (out.target.back().logR - out.target.front().logR) +
                        spec.M * std::log(ratio);
    out.passive_excess = passive_excess;
    const double corr = std::max(0.0, std::max(out.target_excess, out.passive_excess));
    out.correction_C =
        spec.M > 0.0 ? std::expm1(corr) * std::cbrt(spec.xi0 - spec.b) / spec.M : 0.0;
    out.flagged = std::exp(corr) >= 2.0;
    return out;
}

PieceOutcome construct_piece(const PieceSpec& spec, const StarkFrame& frame, double tol) {
    std::vector<PieceBoundary> passive(spec.avoid.size());
    for (std::size_t j = 0; j < passive.size(); ++j)
        passive[j] = {std::fmod(spec.theta0 + 0.7 * (j + 1), M_PI), 0.0};
    return construct_piece(spec, frame, {spec.theta0, 0.0}, std::move(passive), tol);
}

// -------------------------------------------------------------------- glue

GlueResult glue(const ConstructionPlan& plan, const StarkFrame& frame, double xi_max,
                double tol) {
    plan.validate();
    const std::size_t N = plan.num_energies();
    const std::size_t W = plan.blocks.size();
    const auto J = plan.junctions();
    if (xi_max <= 0.0) xi_max = J.back();
    if (xi_max < J.back())
        throw std::invalid_argument("glue: xi_max must reach the last junction");
    const bool modified = frame.alpha != 1.0;
    const double neps_quarter =
        plan.epsilon > 0.0 ? std::pow(static_cast<double>(N), plan.epsilon) + 0.25 : 0.0;

    GlueResult res{GridFunction({1.0}, {0.0}, Interp::Linear, Domain::Xi),
                   GridFunction({1.0}, {0.0}, Interp::Linear, Domain::X),
                   {}, {}, {}, -1, 0.0, 0.0, 0.0};

    std::vector<PieceBoundary> bc(N);
    for (std::size_t j = 0; j < N; ++j) bc[j] = {plan.boundary_angles[j], 0.0};
    res.trajs.assign(N, PruferTrajectory{});

    std::vector<double> vxs, vvs;
    double max_correction_C = 0.0;

    for (std::size_t w = 1; w <= W; ++w) {
        const double T = plan.blocks[w - 1];
        BlockRecord rec;
        rec.w = static_cast<int>(w);
        rec.J_lo = J[w - 1];
        rec.J_hi = J[w];
        rec.T = T;
        rec.ratio = (J[w - 1] + T) / J[w - 1];
        rec.envelope_bound =
            (1.0 + (static_cast<double>(N) - 1.0) * T / J[w - 1]) * 4.0 * plan.M;

        std::vector<double> logR_start(N);
        for (std::size_t j = 0; j < N; ++j) logR_start[j] = bc[j].logR;

        double slack_w = 0.0;
        for (std::size_t t = 0; t < N; ++t) {
            PieceSpec ps;
            ps.E = plan.energies[t];
            ps.xi0 = J[w - 1] + static_cast<double>(t) * T;
            ps.xi1 = ps.xi0 + T;
            ps.b = static_cast<double>(t) * T;
            ps.theta0 = bc[t].theta;
            ps.M = plan.M;
            std::vector<PieceBoundary> passive;
            for (std::size_t j = 0; j < N; ++j)
                if (j != t) {
                    ps.avoid.push_back(plan.energies[j]);
                    passive.push_back(bc[j]);
                }

            PieceOutcome piece = construct_piece(ps, frame, bc[t], std::move(passive), tol);

            for (std::size_t i = 0; i < piece.V.size(); ++i)
                rec.envelope_measured = std::max(
                    rec.envelope_measured, piece.V.node(i) * std::abs(piece.V.value(i)));

            bc[t] = {piece.target.back().theta, piece.target.back().logR};
            res.trajs[t].extend(piece.target);
            std::size_t pi = 0;
            for (std::size_t j = 0; j < N; ++j)
                if (j != t) {
                    bc[j] = {piece.passive[pi].back().theta, piece.passive[pi].back().logR};
                    res.trajs[j].extend(piece.passive[pi]);
                    ++pi;
                }

            const double corr = std::max(0.0, std::max(piece.target_excess, piece.passive_excess));
            slack_w = std::max(slack_w, std::expm1(corr));
            max_correction_C = std::max(max_correction_C, piece.correction_C);
            if (piece.flagged)
                res.warnings.push_back("block " + std::to_string(w) + " piece " +
                                       std::to_string(t) + " (E=" +
                                       format_double(ps.E) + "): correction factor >= 2");
            merge_v(vxs, vvs, piece.V);
        }

        rec.slack = slack_w;
        res.slack = std::max(res.slack, slack_w);
        for (std::size_t j = 0; j < N; ++j) rec.logR_end.push_back(bc[j].logR);

        if (plan.epsilon > 0.0 && rec.ratio >= neps_quarter) {
            if (res.w0 < 0) res.w0 = static_cast<int>(w);
            const double budget = -plan.M * std::log(neps_quarter) +
                                  static_cast<double>(N) * std::log1p(slack_w) + 1e-9;
            for (std::size_t j = 0; j < N; ++j)
                if (bc[j].logR - logR_start[j] > budget) rec.contraction_ok = false;
        }
        res.blocks.push_back(std::move(rec));
    }

    // continue every trajectory over zero potential up to xi_max
    if (xi_max > J.back() * (1.0 + 1e-12)) {
        for (std::size_t j = 0; j < N; ++j) {
            EffectivePotential Q0 = assemble_Q(nullptr, plan.energies[j], frame);
            res.trajs[j].extend(integrate_frame(Q0, J.back(), xi_max, bc[j].theta, bc[j].logR,
                                                tol, modified));
        }
    }

    GridFunction Vsupp(std::move(vxs), std::move(vvs), Interp::Linear, Domain::Xi);
    res.V = extend_with_zeros(Vsupp, std::min(1.0, plan.anchor), xi_max);
    res.q = q_from_V(res.V, frame);
    res.envelope = sup_weighted_q(res.q, frame);
    res.safety = 10.0 * max_correction_C;
    if (res.w0 < 0 && plan.epsilon <= 0.0) res.w0 = 1;
    return res;
}

// ---------------------------------------------------------------- envelopes

double sup_xi_V(const GridFunction& V) {
    double m = 0.0;
    for (std::size_t i = 0; i < V.size(); ++i)
        m = std::max(m, V.node(i) * std::abs(V.value(i)));
    return m;
}

double sup_weighted_q(const GridFunction& q, const StarkFrame& frame) {
    double m = 0.0;
    const double e = 1.0 - 0.5 * frame.alpha;
    for (std::size_t i = 0; i < q.size(); ++i)
        m = std::max(m, std::pow(q.node(i), e) * std::abs(q.value(i)));
    return m;
}

}  // namespace stark
