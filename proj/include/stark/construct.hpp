#pragma once

#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "stark/prufer.hpp"

namespace stark {

/// Block plan of a multi-energy build: energies with their boundary angles at
/// the anchor, the piece coupling M and the block lengths T_1..T_W. Junctions
/// follow as J_w = anchor + N * sum_{j<=w} T_j.
struct ConstructionPlan {
    enum class Kind { Single, Finite, InfinitePrefix };

    Kind kind = Kind::Finite;
    std::vector<double> energies;
    std::vector<double> boundary_angles;
    double M = 0.0;
    double epsilon = 0.0;        // schedule growth parameter (finite schedules)
    std::vector<double> blocks;  // T_1..T_W
    double anchor = 1.0;         // J_0; prefix plans may start further out
    double envelope_budget = 0.0;  // predicted bound on sup x^{1-alpha/2}|q|
    double safety = 0.0;           // measured safety constant, filled by glue

    std::size_t num_energies() const { return energies.size(); }
    std::vector<double> junctions() const;
    void validate() const;

    void save(std::ostream& os) const;
    void save_file(const std::string& path) const;
    static ConstructionPlan load(std::istream& is);
    static ConstructionPlan load_file(const std::string& path);
};

/// epsilon = 1/sqrt(ln N), M = 1/6 + 1/(6 epsilon), T_w = N^{(1+epsilon) w}.
/// Requires N >= 2 (single energies go through construct_single).
ConstructionPlan schedule_finite(std::vector<double> energies, std::vector<double> angles,
                                 int W, const StarkFrame& frame);

/// Finite prefix of the unbounded-count construction: all requested energies
/// are admitted from the first block and the per-block coupling is capped at
/// the reference value 100 but fitted so the realized envelope stays below
/// h(x)/(1 + x^{1-alpha/2}) on the realized range. Throws ScheduleError when
/// no reachable anchor admits even the floor coupling.
ConstructionPlan schedule_infinite_prefix(std::vector<double> energies,
                                          std::vector<double> angles,
                                          const std::function<double(double)>& h, int W,
                                          const StarkFrame& frame);

/// min over q's nodes of h(x) - (1 + x^{1-alpha/2}) |q(x)|.
double prefix_envelope_margin(const GridFunction& q, const std::function<double(double)>& h,
                              const StarkFrame& frame);

// ---------------------------------------------------------------------------

struct SingleBuild {
    GridFunction V;  // xi domain
    GridFunction q;  // x domain
    PruferTrajectory traj;
    double coupling = 0.0;        // d (last block's coupling for schedules)
    double envelope = 0.0;        // sup over nodes of x^{1-alpha/2}|q|
    double envelope_bound = 0.0;  // (2+alpha) d
    std::vector<double> block_lo;     // realized block left edges (schedules)
    std::vector<double> block_d;      // per-block couplings
    double realized_cap = 0.0;        // right end of the realized range
    bool truncated = false;           // schedule cut off at xi_max
};

/// Sign-coupled single-energy build V = -(2d/xi) sgn(sin 2 theta) on
/// [1, xi_max]; the general-exponent frames run in the modified variables.
SingleBuild construct_single(double E, double d, double theta0, double xi_max,
                             const StarkFrame& frame, double tol = 1e-9);

/// Critical-coupling build: d_n = d0 + 1/n on [a_n, a_{n+1}) with
/// a_n = 2^{(4/pi) n^3} and d0 the threshold coupling. The realized range is
/// capped at xi_max (>= a_2) and the truncation is reported.
SingleBuild construct_single_critical(double E, double theta0, double xi_max,
                                      const StarkFrame& frame, double tol = 1e-9);

struct SchrodingerBuild {
    GridFunction V_x;       // potential in x
    PruferTrajectory traj;  // flat-system trajectory in y = k x
    double k = 0.0;         // base frequency sqrt(lambda) = 2a/pi
    double a = 0.0;
    std::vector<double> block_lo;  // realized block edges in y
    std::vector<double> block_xv;  // scheduled x|V| per block
    double realized_cap = 0.0;     // in y
};

/// Critical Wigner-von Neumann-type build for -u'' + Vu = lambda u with
/// lambda = 4a^2/pi^2, run directly in the x frame (no coordinate change).
SchrodingerBuild construct_schrodinger_critical(double a, double theta0, double x_max,
                                                double tol = 1e-9);

// ---------------------------------------------------------------------------

struct PieceSpec {
    double E = 0.0;
    std::vector<double> avoid;
    double xi0 = 0.0, xi1 = 0.0, b = 0.0;
    double theta0 = 0.0;
    double M = 0.0;

    void validate() const;
};

struct PieceBoundary {
    double theta = 0.0;
    double logR = 0.0;
};

struct PieceOutcome {
    GridFunction V;         // supported in (xi0, xi1), ends mollified to zero
    PruferTrajectory target;
    std::vector<PruferTrajectory> passive;
    double target_excess = 0.0;   // drop above the ideal -M log-ratio contraction
    double passive_excess = 0.0;  // max growth of any avoided energy
    double correction_C = 0.0;    // measured per-piece correction constant
    bool flagged = false;         // correction factor reached 2
};

/// One smooth resonant piece V = -(4M/(1+xi-b)) sin 2 theta(.,E): the target
/// energy contracts by about ((xi1-b)/(xi0-b))^{-M} while every avoided
/// energy stays bounded. Endpoints are mollified; all trajectories are
/// integrated over the mollified potential.
PieceOutcome construct_piece(const PieceSpec& spec, const StarkFrame& frame,
                             PieceBoundary target_bc, std::vector<PieceBoundary> passive_bc,
                             double tol = 1e-9);
/// Convenience overload with default passive boundary data.
PieceOutcome construct_piece(const PieceSpec& spec, const StarkFrame& frame,
                             double tol = 1e-9);

/// Multiplies by a smooth cutoff that vanishes to all orders at both ends and
/// equals one outside the windows. Throws when the window exceeds a tenth of
/// the support length.
GridFunction mollify_endpoints(const GridFunction& V, double window);

// ---------------------------------------------------------------------------

struct BlockRecord {
    int w = 0;
    double J_lo = 0.0, J_hi = 0.0, T = 0.0;
    double ratio = 0.0;  // (J_{w-1} + T_w)/J_{w-1}
    double slack = 0.0;  // max per-piece correction in the block
    std::vector<double> logR_end;  // per energy, at J_w
    double envelope_bound = 0.0;   // (1 + (N-1)T_w/J_{w-1}) 4M
    double envelope_measured = 0.0;  // sup xi|V| over the block's nodes
    bool contraction_ok = true;
};

struct GlueResult {
    GridFunction V;
    GridFunction q;
    std::vector<PruferTrajectory> trajs;  // one per energy on [anchor, xi_max]
    std::vector<BlockRecord> blocks;
    std::vector<std::string> warnings;
    int w0 = -1;          // first block whose ratio clears N^epsilon + 1/4
    double slack = 0.0;   // max per-piece correction overall
    double safety = 0.0;  // measured safety constant (10x margin)
    double envelope = 0.0;  // sup over q nodes of x^{1-alpha/2}|q|
};

/// Runs the block induction: within block w the energies take turns as the
/// target of construct_piece with offsets b = t T_w, boundary data chained
/// continuously. Trajectories are continued over zero potential up to xi_max
/// when it exceeds the last junction.
GlueResult glue(const ConstructionPlan& plan, const StarkFrame& frame, double xi_max = 0.0,
                double tol = 1e-9);

// envelope statistics
double sup_xi_V(const GridFunction& V);
double sup_weighted_q(const GridFunction& q, const StarkFrame& frame);

}  // namespace stark
