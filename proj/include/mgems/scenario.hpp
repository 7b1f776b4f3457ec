#pragma once

#include <Eigen/Dense>

#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace mgems {

/// Raised when a scenario file or an in-memory scenario violates the schema
/// or one of the documented invariants. `entity`/`field` identify the object
/// that failed so callers can report actionable diagnostics.
class ValidationError : public std::runtime_error {
 public:
  ValidationError(std::string entity, std::string field, const std::string& reason)
      : std::runtime_error(entity + (field.empty() ? "" : "." + field) + ": " + reason),
        entity(std::move(entity)),
        field(std::move(field)) {}

  std::string entity;
  std::string field;
};

struct Horizon {
  int steps = 0;         // T
  double dt_hours = 0.0; // step length in hours

  double hours() const { return steps * dt_hours; }
  bool operator==(const Horizon&) const = default;
};

/// Per-step tariffs in $/kWh. `community` defaults to the buy/sell midpoint
/// when the input omits it. Ordering sell <= community <= buy holds per step.
struct PriceSchedule {
  Eigen::VectorXd buy;
  Eigen::VectorXd sell;
  Eigen::VectorXd community;

  bool operator==(const PriceSchedule& o) const {
    return buy == o.buy && sell == o.sell && community == o.community;
  }
};

void validate_prices(const PriceSchedule& prices, const Horizon& horizon);

/// Piecewise-linear battery wear cost: breakpoints over per-step energy
/// throughput g (kWh) and the marginal slope of each segment ($/kWh).
/// Cumulative cost F is anchored at zero on the first breakpoint.
struct DegradationCurve {
  Eigen::VectorXd breakpoints_kwh; // strictly increasing, size N >= 2
  Eigen::VectorXd slopes;          // size N-1

  Eigen::VectorXd cumulative_cost() const;
  double cost_at(double g) const;
  bool covers(double g_min, double g_max) const;

  bool operator==(const DegradationCurve& o) const {
    return breakpoints_kwh == o.breakpoints_kwh && slopes == o.slopes;
  }
};

struct EnergyStorageSpec {
  std::string id;
  double capacity_max_kwh = 0.0;
  double capacity_min_kwh = 0.0;
  double initial_energy_kwh = 0.0;
  double discharge_power_max_kw = 0.0; // > 0
  double charge_power_min_kw = 0.0;    // < 0
  double efficiency = 1.0;             // (0, 1]
  DegradationCurve degradation;

  bool operator==(const EnergyStorageSpec&) const = default;
};

/// Half-open parking interval in steps. A window ending before the horizon
/// ends with a departure and must carry the minimum departure energy; a
/// window starting after step 0 begins with a return and must carry the
/// energy the vehicle comes back with.
struct ParkingWindow {
  int start_step = 0;
  int end_step = 0;
  std::optional<double> departure_energy_min_kwh;
  std::optional<double> return_energy_kwh;

  bool operator==(const ParkingWindow&) const = default;
};

struct ElectricVehicleSpec {
  std::string id;
  double capacity_max_kwh = 0.0;
  double capacity_min_kwh = 0.0;
  double initial_energy_kwh = 0.0;
  double discharge_power_max_kw = 0.0;
  double charge_power_min_kw = 0.0;
  double efficiency = 1.0;
  std::vector<ParkingWindow> windows;

  bool operator==(const ElectricVehicleSpec&) const = default;
};

enum class LoadKind { Type1 = 1, Type2 = 2 };

struct StepInterval {
  int begin = 0;
  int end = 0; // half-open

  int length() const { return end - begin; }
  bool contains(int t) const { return t >= begin && t < end; }
  bool operator==(const StepInterval&) const = default;
};

struct DispatchableLoadSpec {
  std::string id;
  LoadKind kind = LoadKind::Type1;
  double power_kw = 0.0;
  int duration_steps = 0; // H
  std::vector<StepInterval> windows;
  double total_energy_kwh = 0.0; // P = power * H * dt; derived when omitted

  bool allows(int t) const;
  bool operator==(const DispatchableLoadSpec&) const = default;
};

struct PeerLimit {
  double import_max_kw = 0.0; // > 0
  double export_min_kw = 0.0; // < 0

  bool operator==(const PeerLimit&) const = default;
};

struct MicrogridSpec {
  std::string id;
  double x = 0.0;
  double y = 0.0;
  double grid_import_max_kw = 0.0; // > 0
  double grid_export_min_kw = 0.0; // < 0
  PeerLimit peer_default;
  std::map<std::string, PeerLimit> peer_overrides; // by counterparty id
  std::vector<EnergyStorageSpec> storages;
  std::vector<ElectricVehicleSpec> evs;
  Eigen::VectorXd fixed_load_kw;
  Eigen::VectorXd pv_kw;
  std::vector<DispatchableLoadSpec> loads;

  PeerLimit peer_limit(const std::string& counterparty) const;

  bool operator==(const MicrogridSpec& o) const {
    return id == o.id && x == o.x && y == o.y &&
           grid_import_max_kw == o.grid_import_max_kw &&
           grid_export_min_kw == o.grid_export_min_kw &&
           peer_default == o.peer_default && peer_overrides == o.peer_overrides &&
           storages == o.storages && evs == o.evs &&
           fixed_load_kw == o.fixed_load_kw && pv_kw == o.pv_kw && loads == o.loads;
  }
};

/// Pairwise loss factors and connectivity. Entries on the diagonal and for
/// unconnected pairs are irrelevant to settlement; the weight matrix puts the
/// big-M sentinel there.
struct Topology {
  double loss_factor_default = 0.05;
  Eigen::MatrixXd loss_factors; // n x n, symmetric, >= 0
  Eigen::MatrixXi connectivity; // 0/1, symmetric, diagonal ignored
  double big_m = 1e9;

  bool connected(int i, int j) const { return i != j && connectivity(i, j) != 0; }

  bool operator==(const Topology& o) const {
    return loss_factor_default == o.loss_factor_default &&
           loss_factors == o.loss_factors && connectivity == o.connectivity &&
           big_m == o.big_m;
  }
};

struct Scenario {
  Horizon horizon;
  PriceSchedule prices;
  Topology topology;
  std::vector<MicrogridSpec> microgrids;

  int mg_count() const { return static_cast<int>(microgrids.size()); }
  int mg_index(const std::string& id) const;
  double distance(int i, int j) const;

  bool operator==(const Scenario&) const = default;
};

/// Checks every documented invariant; throws ValidationError on the first
/// violation. A scenario returned by load_scenario has already passed.
void validate_scenario(const Scenario& scenario);

Scenario load_scenario(const std::string& path);
Scenario scenario_from_json_text(const std::string& text, const std::string& base_dir = ".");
std::string scenario_to_json_text(const Scenario& scenario);
void save_scenario(const Scenario& scenario, const std::string& path);

/// FNV-1a over the canonical JSON form; stable across runs and platforms.
std::string scenario_hash(const Scenario& scenario);

} // namespace mgems
