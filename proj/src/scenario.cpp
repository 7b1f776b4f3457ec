#include "mgems/scenario.hpp"

#include <algorithm>
#include <cmath>

namespace mgems {

namespace {

bool finite(double v) { return std::isfinite(v); }

void require(bool ok, const std::string& entity, const std::string& field,
             const std::string& reason) {
  if (!ok) throw ValidationError(entity, field, reason);
}

void check_profile(const Eigen::VectorXd& p, int steps, bool nonnegative,
                   const std::string& entity, const std::string& field) {
  require(p.size() == steps, entity, field,
          "profile has " + std::to_string(p.size()) + " entries, horizon has " +
              std::to_string(steps) + " steps");
  for (int t = 0; t < p.size(); ++t) {
    require(finite(p[t]), entity, field, "non-finite value at step " + std::to_string(t));
    if (nonnegative)
      require(p[t] >= 0.0, entity, field, "negative value at step " + std::to_string(t));
  }
}

void check_storage_common(const std::string& entity, double cap_max, double cap_min,
                          double e0, double p_max, double p_min, double eff) {
  require(finite(cap_max) && finite(cap_min) && finite(e0), entity, "capacity",
          "non-finite energy bound");
  require(cap_min <= cap_max, entity, "capacity_min", "capacity_min exceeds capacity_max");
  require(cap_min <= e0 && e0 <= cap_max, entity, "initial_energy",
          "initial energy outside [capacity_min, capacity_max]");
  require(p_min < 0.0, entity, "charge_power_min", "must be negative");
  require(p_max > 0.0, entity, "discharge_power_max", "must be positive");
  require(eff > 0.0 && eff <= 1.0, entity, "efficiency", "must lie in (0, 1]");
}

} // namespace

Eigen::VectorXd DegradationCurve::cumulative_cost() const {
  const auto n = breakpoints_kwh.size();
  Eigen::VectorXd f = Eigen::VectorXd::Zero(n);
  for (Eigen::Index i = 1; i < n; ++i)
    f[i] = f[i - 1] + slopes[i - 1] * (breakpoints_kwh[i] - breakpoints_kwh[i - 1]);
  return f;
}

double DegradationCurve::cost_at(double g) const {
  const Eigen::VectorXd f = cumulative_cost();
  const auto n = breakpoints_kwh.size();
  if (g <= breakpoints_kwh[0]) return f[0];
  for (Eigen::Index i = 1; i < n; ++i) {
    if (g <= breakpoints_kwh[i]) {
      const double left = breakpoints_kwh[i - 1];
      const double right = breakpoints_kwh[i];
      const double a = (g - left) / (right - left);
      return (1.0 - a) * f[i - 1] + a * f[i];
    }
  }
  return f[n - 1];
}

bool DegradationCurve::covers(double g_min, double g_max) const {
  if (breakpoints_kwh.size() < 2) return false;
  return breakpoints_kwh[0] <= g_min + 1e-12 &&
         breakpoints_kwh[breakpoints_kwh.size() - 1] >= g_max - 1e-12;
}

bool DispatchableLoadSpec::allows(int t) const {
  return std::any_of(windows.begin(), windows.end(),
                     [t](const StepInterval& w) { return w.contains(t); });
}

PeerLimit MicrogridSpec::peer_limit(const std::string& counterparty) const {
  auto it = peer_overrides.find(counterparty);
  return it != peer_overrides.end() ? it->second : peer_default;
}

int Scenario::mg_index(const std::string& id) const {
  for (int i = 0; i < mg_count(); ++i)
    if (microgrids[i].id == id) return i;
  return -1;
}

double Scenario::distance(int i, int j) const {
  const double dx = microgrids[i].x - microgrids[j].x;
  const double dy = microgrids[i].y - microgrids[j].y;
  return std::sqrt(dx * dx + dy * dy);
}

void validate_prices(const PriceSchedule& prices, const Horizon& horizon) {
  const int steps = horizon.steps;
  require(prices.buy.size() == steps, "prices", "buy", "length mismatch with horizon");
  require(prices.sell.size() == steps, "prices", "sell", "length mismatch with horizon");
  require(prices.community.size() == steps, "prices", "community",
          "length mismatch with horizon");
  for (int t = 0; t < steps; ++t) {
    const double b = prices.buy[t], s = prices.sell[t], c = prices.community[t];
    require(finite(b) && finite(s) && finite(c), "prices", "",
            "non-finite price at step " + std::to_string(t));
    require(s >= 0.0, "prices", "sell", "negative price at step " + std::to_string(t));
    if (!(s <= c && c <= b))
      throw ValidationError("prices", "",
                            "ordering sell <= community <= buy violated at step " +
                                std::to_string(t));
  }
}

void validate_scenario(const Scenario& scenario) {
  const Horizon& h = scenario.horizon;
  require(h.steps >= 1, "horizon", "steps", "must be >= 1");
  require(h.dt_hours > 0.0 && finite(h.dt_hours), "horizon", "dt_hours", "must be > 0");

  validate_prices(scenario.prices, h);

  const int n = scenario.mg_count();
  require(n >= 1, "scenario", "microgrids", "community has no microgrids");

  // Unique ids.
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      require(scenario.microgrids[i].id != scenario.microgrids[j].id, "scenario",
              "microgrids", "duplicate microgrid id '" + scenario.microgrids[i].id + "'");

  const Topology& topo = scenario.topology;
  require(topo.big_m > 0.0, "topology", "big_m", "must be positive");
  require(topo.loss_factor_default >= 0.0, "topology", "loss_factor_default",
          "must be >= 0");
  require(topo.loss_factors.rows() == n && topo.loss_factors.cols() == n, "topology",
          "loss_factors", "matrix must be n x n");
  require(topo.connectivity.rows() == n && topo.connectivity.cols() == n, "topology",
          "connectivity", "matrix must be n x n");
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      require(finite(topo.loss_factors(i, j)) && topo.loss_factors(i, j) >= 0.0,
              "topology", "loss_factors", "entries must be finite and >= 0");
      require(topo.loss_factors(i, j) == topo.loss_factors(j, i), "topology",
              "loss_factors", "matrix must be symmetric");
      require(topo.connectivity(i, j) == topo.connectivity(j, i), "topology",
              "connectivity", "matrix must be symmetric");
    }
  }
  // Loss fraction validity: eps * distance must be a valid fraction.
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      if (!topo.connected(i, j)) continue;
      const double w = topo.loss_factors(i, j) * scenario.distance(i, j);
      require(w >= 0.0 && w < 1.0, "topology", "loss_factors",
              "loss fraction for pair (" + scenario.microgrids[i].id + ", " +
                  scenario.microgrids[j].id + ") is " + std::to_string(w) +
                  ", must lie in [0, 1)");
    }
  }

  for (const MicrogridSpec& mg : scenario.microgrids) {
    const std::string ent = "microgrid '" + mg.id + "'";
    require(finite(mg.x) && finite(mg.y), ent, "location", "non-finite coordinate");
    require(mg.grid_import_max_kw > 0.0, ent, "grid_import_max_kw", "must be positive");
    require(mg.grid_export_min_kw < 0.0, ent, "grid_export_min_kw", "must be negative");
    require(mg.peer_default.import_max_kw > 0.0, ent, "peer_import_max_kw",
            "must be positive");
    require(mg.peer_default.export_min_kw < 0.0, ent, "peer_export_min_kw",
            "must be negative");
    for (const auto& [other, lim] : mg.peer_overrides) {
      require(scenario.mg_index(other) >= 0, ent, "peer_limits",
              "unknown counterparty '" + other + "'");
      require(lim.import_max_kw > 0.0 && lim.export_min_kw < 0.0, ent, "peer_limits",
              "limits for '" + other + "' must satisfy export_min < 0 < import_max");
    }

    check_profile(mg.fixed_load_kw, h.steps, true, ent, "fixed_load");
    check_profile(mg.pv_kw, h.steps, true, ent, "pv");

    for (const EnergyStorageSpec& es : mg.storages) {
      const std::string se = ent + " storage '" + es.id + "'";
      check_storage_common(se, es.capacity_max_kwh, es.capacity_min_kwh,
                           es.initial_energy_kwh, es.discharge_power_max_kw,
                           es.charge_power_min_kw, es.efficiency);
      const auto& g = es.degradation.breakpoints_kwh;
      require(g.size() >= 2, se, "degradation", "needs at least two breakpoints");
      require(es.degradation.slopes.size() == g.size() - 1, se, "degradation",
              "expected " + std::to_string(g.size() - 1) + " slopes for " +
                  std::to_string(g.size()) + " breakpoints");
      for (Eigen::Index k = 0; k + 1 < g.size(); ++k)
        require(g[k] < g[k + 1], se, "degradation", "breakpoints must strictly increase");
      const double g_lo = es.charge_power_min_kw * h.dt_hours * es.efficiency;
      const double g_hi = es.discharge_power_max_kw * h.dt_hours;
      require(es.degradation.covers(g_lo, g_hi), se, "degradation",
              "breakpoints must span the throughput range [" + std::to_string(g_lo) +
                  ", " + std::to_string(g_hi) + "]");
    }

    for (const ElectricVehicleSpec& ev : mg.evs) {
      const std::string se = ent + " ev '" + ev.id + "'";
      check_storage_common(se, ev.capacity_max_kwh, ev.capacity_min_kwh,
                           ev.initial_energy_kwh, ev.discharge_power_max_kw,
                           ev.charge_power_min_kw, ev.efficiency);
      require(!ev.windows.empty(), se, "parking_windows", "needs at least one window");
      int prev_end = -1;
      for (size_t w = 0; w < ev.windows.size(); ++w) {
        const ParkingWindow& pw = ev.windows[w];
        const std::string wf = "parking_windows[" + std::to_string(w) + "]";
        require(pw.start_step >= 0 && pw.end_step <= h.steps && pw.start_step < pw.end_step,
                se, wf, "window must satisfy 0 <= start < end <= steps");
        require(pw.start_step > prev_end, se, wf, "windows must be disjoint and sorted");
        prev_end = pw.end_step;
        if (pw.end_step < h.steps) {
          require(pw.departure_energy_min_kwh.has_value(), se, wf,
                  "window ends with a departure and needs departure_energy_min_kwh");
          require(*pw.departure_energy_min_kwh <= ev.capacity_max_kwh, se, wf,
                  "departure energy exceeds capacity_max");
        }
        if (pw.start_step > 0) {
          require(pw.return_energy_kwh.has_value(), se, wf,
                  "window begins with a return and needs return_energy_kwh");
          require(*pw.return_energy_kwh >= ev.capacity_min_kwh &&
                      *pw.return_energy_kwh <= ev.capacity_max_kwh,
                  se, wf, "return energy outside [capacity_min, capacity_max]");
        }
      }
    }

    for (const DispatchableLoadSpec& dl : mg.loads) {
      const std::string se = ent + " load '" + dl.id + "'";
      require(dl.power_kw > 0.0 && finite(dl.power_kw), se, "power_kw",
              "must be positive");
      require(dl.duration_steps >= 1, se, "duration_steps", "must be >= 1");
      require(!dl.windows.empty(), se, "allowed_windows", "needs at least one window");
      int prev_end = -1;
      int total_len = 0;
      int longest = 0;
      for (size_t w = 0; w < dl.windows.size(); ++w) {
        const StepInterval& iv = dl.windows[w];
        const std::string wf = "allowed_windows[" + std::to_string(w) + "]";
        require(iv.begin >= 0 && iv.end <= h.steps && iv.begin < iv.end, se, wf,
                "window must satisfy 0 <= begin < end <= steps");
        require(iv.begin > prev_end, se, wf, "windows must be disjoint and sorted");
        prev_end = iv.end;
        total_len += iv.length();
        longest = std::max(longest, iv.length());
      }
      require(total_len >= dl.duration_steps, se, "allowed_windows",
              "total window length " + std::to_string(total_len) +
                  " is shorter than duration " + std::to_string(dl.duration_steps));
      if (dl.kind == LoadKind::Type2)
        require(longest >= dl.duration_steps, se, "allowed_windows",
                "type-2 load needs one window of length >= duration");
      const double expected = dl.power_kw * dl.duration_steps * h.dt_hours;
      require(std::abs(dl.total_energy_kwh - expected) <= 1e-9 * (1.0 + expected), se,
              "total_energy_kwh",
              "must equal power * duration * dt = " + std::to_string(expected));
    }
  }
}

} // namespace mgems
