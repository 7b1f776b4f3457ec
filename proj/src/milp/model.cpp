#include "mgems/milp/model.hpp"

#include <cmath>
#include <fstream>
#include <map>
#include <ostream>
#include <sstream>

namespace mgems::milp {

VarId MilpModel::add_variable(VarKind kind, double lower, double upper, std::string name) {
  switch (kind) {
    case VarKind::Binary:
    case VarKind::IntegerPos:
      lower = 0.0;
      upper = 1.0;
      break;
    case VarKind::IntegerNeg:
      lower = -1.0;
      upper = 0.0;
      break;
    case VarKind::Continuous:
      if (std::isnan(lower) || std::isnan(upper))
        throw ModelError("variable '" + name + "': NaN bound");
      if (lower > upper)
        throw ModelError("variable '" + name + "': lower bound exceeds upper bound");
      break;
  }
  Variable v;
  v.kind = kind;
  v.lower = lower;
  v.upper = upper;
  v.name = std::move(name);
  vars_.push_back(std::move(v));
  if (kind != VarKind::Continuous) ++num_discrete_;
  const int id = num_vars() - 1;
  if (objective_.size() < num_vars()) {
    objective_.conservativeResize(num_vars());
    objective_[id] = 0.0;
  }
  return VarId{id};
}

ConstraintId MilpModel::add_constraint(std::vector<LinearTerm> terms, Relation rel,
                                       double rhs, std::string name) {
  if (!std::isfinite(rhs))
    throw ModelError("constraint '" + name + "': non-finite right-hand side");
  for (const LinearTerm& t : terms) {
    check(t.var);
    if (!std::isfinite(t.coeff))
      throw ModelError("constraint '" + name + "': non-finite coefficient on variable '" +
                       vars_[t.var.value].name + "'");
  }
  Constraint c;
  c.terms = std::move(terms);
  c.rel = rel;
  c.rhs = rhs;
  c.name = std::move(name);
  rows_.push_back(std::move(c));
  return ConstraintId{num_constraints() - 1};
}

int MilpModel::add_sos2(std::vector<VarId> vars, std::string name) {
  if (vars.size() < 2) throw ModelError("SOS-2 group '" + name + "' needs >= 2 variables");
  for (VarId v : vars) check(v);
  Sos2Group g;
  g.vars = std::move(vars);
  g.name = std::move(name);
  sos2_.push_back(std::move(g));
  return static_cast<int>(sos2_.size()) - 1;
}

void MilpModel::set_objective(const std::vector<LinearTerm>& terms, double constant) {
  if (objective_.size() < num_vars()) {
    const auto old = objective_.size();
    objective_.conservativeResize(num_vars());
    objective_.tail(num_vars() - old).setZero();
  }
  for (const LinearTerm& t : terms) {
    check(t.var);
    if (!std::isfinite(t.coeff))
      throw ModelError("objective: non-finite coefficient on variable '" +
                       vars_[t.var.value].name + "'");
    objective_[t.var.value] += t.coeff;
  }
  if (!std::isfinite(constant)) throw ModelError("objective: non-finite constant");
  objective_constant_ += constant;
}

double MilpModel::evaluate_objective(const Eigen::VectorXd& x) const {
  return objective_.head(num_vars()).dot(x.head(num_vars())) + objective_constant_;
}

namespace {

std::string lp_name(const std::string& name, const char* prefix, int index) {
  if (name.empty()) return std::string(prefix) + std::to_string(index);
  std::string out;
  out.reserve(name.size());
  for (char c : name)
    out.push_back(std::isalnum(static_cast<unsigned char>(c)) ? c : '_');
  if (!out.empty() && std::isdigit(static_cast<unsigned char>(out[0])))
    out.insert(out.begin(), 'x');
  return out;
}

void write_terms(std::ostream& os, const std::vector<LinearTerm>& terms,
                 const std::vector<Variable>& vars) {
  bool first = true;
  for (const LinearTerm& t : terms) {
    const double c = t.coeff;
    if (c == 0.0) continue;
    if (first) {
      os << (c < 0 ? "- " : "");
      first = false;
    } else {
      os << (c < 0 ? " - " : " + ");
    }
    os << std::abs(c) << " " << lp_name(vars[t.var.value].name, "x", t.var.value);
  }
  if (first) os << "0 " << lp_name(vars[0].name, "x", 0);
}

} // namespace

void MilpModel::write_lp(std::ostream& os) const {
  os << "\\ generated model: " << num_vars() << " vars, " << num_constraints()
     << " rows, " << sos2_.size() << " sos2 groups\n";
  os << "Minimize\n obj: ";
  std::vector<LinearTerm> obj;
  for (int i = 0; i < num_vars(); ++i)
    if (objective_[i] != 0.0) obj.push_back({VarId{i}, objective_[i]});
  write_terms(os, obj, vars_);
  os << "\nSubject To\n";
  for (int r = 0; r < num_constraints(); ++r) {
    const Constraint& c = rows_[r];
    os << " " << lp_name(c.name, "c", r) << ": ";
    write_terms(os, c.terms, vars_);
    switch (c.rel) {
      case Relation::LessEqual: os << " <= "; break;
      case Relation::Equal: os << " = "; break;
      case Relation::GreaterEqual: os << " >= "; break;
    }
    os << c.rhs << "\n";
  }
  os << "Bounds\n";
  for (int i = 0; i < num_vars(); ++i) {
    const Variable& v = vars_[i];
    const std::string n = lp_name(v.name, "x", i);
    if (v.lower == -kInf && v.upper == kInf) {
      os << " " << n << " free\n";
    } else {
      if (v.lower == -kInf)
        os << " -inf <= " << n;
      else
        os << " " << v.lower << " <= " << n;
      if (v.upper == kInf)
        os << "\n";
      else
        os << " <= " << v.upper << "\n";
    }
  }
  bool any_int = false;
  for (const Variable& v : vars_)
    if (v.is_discrete()) any_int = true;
  if (any_int) {
    os << "Generals\n";
    for (int i = 0; i < num_vars(); ++i)
      if (vars_[i].is_discrete()) os << " " << lp_name(vars_[i].name, "x", i) << "\n";
  }
  if (!sos2_.empty()) {
    os << "SOS\n";
    for (size_t g = 0; g < sos2_.size(); ++g) {
      os << " " << lp_name(sos2_[g].name, "sos", static_cast<int>(g)) << ": S2 ::";
      int weight = 1;
      for (VarId v : sos2_[g].vars)
        os << " " << lp_name(vars_[v.value].name, "x", v.value) << ":" << weight++;
      os << "\n";
    }
  }
  os << "End\n";
}

void MilpModel::write_lp_file(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw ModelError("cannot open '" + path + "' for writing");
  write_lp(out);
}

std::string to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::Optimal: return "optimal";
    case SolveStatus::Infeasible: return "infeasible";
    case SolveStatus::Unbounded: return "unbounded";
    case SolveStatus::Limit: return "limit";
  }
  return "unknown";
}

std::vector<RowViolation> audit(const MilpModel& model, const Eigen::VectorXd& x,
                                double feas_tol, double int_tol) {
  std::vector<RowViolation> out;
  if (x.size() != model.num_vars()) {
    out.push_back({-1, -1, 0.0, "solution vector length mismatch"});
    return out;
  }
  for (int i = 0; i < model.num_vars(); ++i) {
    const Variable& v = model.variables()[i];
    if (x[i] < v.lower - feas_tol || x[i] > v.upper + feas_tol)
      out.push_back({-1, i,
                     std::max(v.lower - x[i], x[i] - v.upper),
                     "bound violation on '" + v.name + "'"});
    if (v.is_discrete()) {
      const double r = std::abs(x[i] - std::round(x[i]));
      if (r > int_tol)
        out.push_back({-1, i, r, "integrality violation on '" + v.name + "'"});
    }
  }
  for (int r = 0; r < model.num_constraints(); ++r) {
    const Constraint& c = model.constraints()[r];
    double lhs = 0.0;
    for (const LinearTerm& t : c.terms) lhs += t.coeff * x[t.var.value];
    double viol = 0.0;
    switch (c.rel) {
      case Relation::LessEqual: viol = lhs - c.rhs; break;
      case Relation::GreaterEqual: viol = c.rhs - lhs; break;
      case Relation::Equal: viol = std::abs(lhs - c.rhs); break;
    }
    if (viol > feas_tol)
      out.push_back({r, -1, viol, "row '" + c.name + "' violated by " + std::to_string(viol)});
  }
  for (size_t g = 0; g < model.sos2_groups().size(); ++g) {
    const Sos2Group& grp = model.sos2_groups()[g];
    int first = -1, last = -1, count = 0;
    for (size_t k = 0; k < grp.vars.size(); ++k) {
      if (std::abs(x[grp.vars[k].value]) > int_tol) {
        if (first < 0) first = static_cast<int>(k);
        last = static_cast<int>(k);
        ++count;
      }
    }
    if (count > 2 || (count == 2 && last - first != 1))
      out.push_back({-1, -1, 0.0,
                     "SOS-2 group '" + grp.name + "' has non-adjacent or >2 nonzeros"});
  }
  return out;
}

} // namespace mgems::milp
