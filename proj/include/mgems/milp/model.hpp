#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <iosfwd>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace mgems::milp {

class ModelError : public std::runtime_error {
 public:
  explicit ModelError(const std::string& what) : std::runtime_error(what) {}
};

struct VarId {
  int value = -1;
  bool valid() const { return value >= 0; }
  bool operator==(const VarId&) const = default;
};

struct ConstraintId {
  int value = -1;
  bool operator==(const ConstraintId&) const = default;
};

enum class VarKind {
  Continuous,
  Binary,     // {0, 1}
  IntegerNeg, // {-1, 0}
  IntegerPos, // {0, 1}, integer but not a logical flag
};

enum class Relation { LessEqual, Equal, GreaterEqual };

struct LinearTerm {
  VarId var;
  double coeff = 0.0;
};

struct Variable {
  VarKind kind = VarKind::Continuous;
  double lower = 0.0;
  double upper = 0.0;
  std::string name;

  bool is_discrete() const { return kind != VarKind::Continuous; }
};

struct Constraint {
  std::vector<LinearTerm> terms;
  Relation rel = Relation::Equal;
  double rhs = 0.0;
  std::string name;
};

struct Sos2Group {
  std::vector<VarId> vars; // in breakpoint order
  std::string name;
};

constexpr double kInf = std::numeric_limits<double>::infinity();

/// Language-neutral MILP: dense variable/constraint registry, sparse rows,
/// SOS-2 groups, minimizing linear objective. Construction is single-owner;
/// the model is immutable once handed to a solver.
class MilpModel {
 public:
  VarId add_variable(VarKind kind, double lower, double upper, std::string name);
  VarId add_continuous(double lower, double upper, std::string name) {
    return add_variable(VarKind::Continuous, lower, upper, std::move(name));
  }
  VarId add_binary(std::string name) {
    return add_variable(VarKind::Binary, 0.0, 1.0, std::move(name));
  }

  ConstraintId add_constraint(std::vector<LinearTerm> terms, Relation rel, double rhs,
                              std::string name = {});
  int add_sos2(std::vector<VarId> vars, std::string name = {});

  /// Adds to the objective; repeated calls accumulate, repeated terms sum.
  void set_objective(const std::vector<LinearTerm>& terms, double constant = 0.0);

  int num_vars() const { return static_cast<int>(vars_.size()); }
  int num_constraints() const { return static_cast<int>(rows_.size()); }
  int num_discrete() const { return num_discrete_; }
  const Variable& var(VarId id) const { return vars_[check(id)]; }
  const std::vector<Variable>& variables() const { return vars_; }
  const std::vector<Constraint>& constraints() const { return rows_; }
  const std::vector<Sos2Group>& sos2_groups() const { return sos2_; }
  const Eigen::VectorXd& objective() const { return objective_; }
  double objective_constant() const { return objective_constant_; }

  double evaluate_objective(const Eigen::VectorXd& x) const;

  /// CPLEX LP text format, for debugging with external tools.
  void write_lp(std::ostream& os) const;
  void write_lp_file(const std::string& path) const;

 private:
  int check(VarId id) const {
    if (!id.valid() || id.value >= num_vars())
      throw ModelError("unknown variable id " + std::to_string(id.value));
    return id.value;
  }

  std::vector<Variable> vars_;
  std::vector<Constraint> rows_;
  std::vector<Sos2Group> sos2_;
  Eigen::VectorXd objective_;
  double objective_constant_ = 0.0;
  int num_discrete_ = 0;
};

enum class SolveStatus { Optimal, Infeasible, Unbounded, Limit };

std::string to_string(SolveStatus s);

struct SolveStats {
  long nodes = 0;
  long simplex_iterations = 0;
  double wall_ms = 0.0;
};

struct Solution {
  SolveStatus status = SolveStatus::Limit;
  double objective = std::numeric_limits<double>::quiet_NaN();
  Eigen::VectorXd values;
  SolveStats stats;
  std::string message;
};

struct RowViolation {
  int row = -1;         // -1 flags a bound/integrality violation
  int var = -1;
  double amount = 0.0;
  std::string detail;
};

/// Independent feasibility audit: re-evaluates every constraint, bound,
/// integrality requirement and SOS-2 group of `x` against the model.
std::vector<RowViolation> audit(const MilpModel& model, const Eigen::VectorXd& x,
                                double feas_tol = 1e-6, double int_tol = 1e-5);

} // namespace mgems::milp
