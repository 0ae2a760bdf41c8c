#pragma once

#include <optional>
#include <string>
#include <vector>

#include "hybridcq/convex_sets.hpp"
#include "hybridcq/geometry.hpp"
#include "hybridcq/mappings.hpp"

namespace hybridcq {

//! Closed-form step rule n -> [0, 1].
class StepRule {
public:
    enum class Kind { constant, one_minus_inv, inv, inv_square };

    static StepRule constant(double c);
    //! 1 - 1 / (n + n0)
    static StepRule one_minus_inv(double n0);
    //! 1 / (n + n0)
    static StepRule inv(double n0);
    //! 1 / (n + n0)^2
    static StepRule inv_square(double n0);

    Kind kind() const { return kind_; }
    double parameter() const { return param_; }
    double at(int n) const;
    //! lim_{n -> inf}, from the closed form.
    double limit() const;
    std::string describe() const;

    friend bool operator==(const StepRule& a, const StepRule& b) {
        return a.kind_ == b.kind_ && a.param_ == b.param_;
    }

private:
    StepRule(Kind k, double p) : kind_(k), param_(p) {}
    Kind kind_;
    double param_;
};

//! alpha_n and beta_n. Defaults: alpha_n = 1/2, beta_n = 1 - 1/(n+2).
struct Schedule {
    StepRule alpha = StepRule::constant(0.5);
    StepRule beta = StepRule::one_minus_inv(2.0);
};

enum class Scheme { mann, ishikawa, nakajo_takahashi, kim_xu, myx, hybrid_hilbert, hybrid_banach };

const char* to_string(Scheme s);
std::optional<Scheme> scheme_from_string(const std::string& s);

struct SolverConfig {
    Scheme scheme = Scheme::hybrid_hilbert;
    Schedule schedule;
    //! Unset: R_C^2 + 1 with R_C the norm radius of the domain.
    std::optional<double> M;
    //! Kim-Xu only. Unset: the Euclidean diameter of the domain.
    std::optional<double> diam_C;
    Vector x0;
    int max_iter = 500;
    double stop_tol = 1e-9;
    //! Stop only once ||T x_{n+1} - x_{n+1}|| <= residual_tol as well; a loose C_n
    //! can leave x_{n+1} = x_n long before the limit is reached.
    double residual_tol = 1e-8;
    double projection_tol = 1e-10;
    //! Expected limit; dist_to_target is recorded as zero when unset.
    std::optional<Vector> target;
    //! Points of F(T) whose C_n / Q_n slacks are recorded (minimum over the list).
    //! The target is used when empty.
    std::vector<Vector> probes;
};

struct IterationRecord {
    int n = 0;
    Vector x;
    Vector y;
    Vector z;
    //! phi(x_{n+1}, x_n)
    double phi_step = 0.0;
    //! ||x_{n+1} - y_n||
    double step_to_y = 0.0;
    //! ||T x_n - x_n||
    double residual = 0.0;
    double dist_to_target = 0.0;
    //! Signed slack of the reference points in C_n and Q_n; zero for schemes
    //! without those sets.
    double cn_slack_pref = 0.0;
    double qn_slack_pref = 0.0;
};

enum class Termination { tolerance, max_iter, error };

const char* to_string(Termination t);

struct IterationTrace {
    Scheme scheme = Scheme::mann;
    std::vector<IterationRecord> records;
    Termination terminated_by = Termination::max_iter;
    Vector final_point;
    std::string error;
    //! M used by C_n (hybrid schemes), otherwise zero.
    double M = 0.0;
    //! Number of projections that fell back to the intersection with C.
    int domain_fallbacks = 0;
};

//! Affine form of C_n = {v : phi(v, y) <= phi(v, x) + (1 - alpha)(k^2 |z|^2 - |x|^2
//!   + (k^2 - 1) M - 2 <v, k^2 Jz - Jx>)}.
struct CnInputs {
    Vector x;
    Vector y;
    Vector z;
    double alpha = 0.5;
    double k = 1.0;
    double M = 0.0;
};

DualHalfSpace half_space_of_Cn(const SpaceGeometry& g, const CnInputs& in);

//! Q_n = {v : <Jx0 - Jx_n, x_n - v> >= 0}. Zero normal (whole space) when x_n = x0.
DualHalfSpace half_space_of_Qn(const SpaceGeometry& g, const Vector& x0, const Vector& xn);

//! theta_n = (1 - alpha_n)(k_n^2 - 1) diam(C)^2
double kim_xu_theta(double alpha, double k, double diam);

//! Every breached precondition of the scheme, one message each. Empty when valid.
std::vector<std::string> check_hypotheses(const MappingSpec& m, const SpaceGeometry& g, const SolverConfig& cfg);

//! M actually used: the explicit value or R_C^2 + 1.
double resolve_M(const MappingSpec& m, const SpaceGeometry& g, const SolverConfig& cfg);

// Each runner validates up front (ValidationError) and then iterates. Failures
// during the iteration end the trace with Termination::error.
IterationTrace run_mann(const MappingSpec& m, const SolverConfig& cfg);
IterationTrace run_ishikawa(const MappingSpec& m, const SolverConfig& cfg);
IterationTrace run_nakajo_takahashi(const MappingSpec& m, const SolverConfig& cfg);
IterationTrace run_kim_xu(const MappingSpec& m, const SolverConfig& cfg);
IterationTrace run_myx(const MappingSpec& m, const SolverConfig& cfg);
IterationTrace run_hybrid_hilbert(const MappingSpec& m, const SolverConfig& cfg);
IterationTrace run_hybrid_banach(const MappingSpec& m, const SpaceGeometry& g, const SolverConfig& cfg);

//! Dispatch on cfg.scheme. g is only consulted by hybrid_banach.
IterationTrace run_scheme(const MappingSpec& m, const SpaceGeometry& g, const SolverConfig& cfg);

} // namespace hybridcq
