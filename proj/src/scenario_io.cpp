#include "mgems/scenario.hpp"

#include <json.hpp>

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace mgems {

namespace {

using nlohmann::ordered_json;

[[noreturn]] void fail(const std::string& field, const std::string& reason) {
  throw ValidationError("scenario file", field, reason);
}

const ordered_json& member(const ordered_json& j, const std::string& key,
                           const std::string& where) {
  auto it = j.find(key);
  if (it == j.end()) fail(where, "missing required key '" + key + "'");
  return *it;
}

double number(const ordered_json& j, const std::string& where) {
  if (!j.is_number()) fail(where, "expected a number");
  return j.get<double>();
}

double number_at(const ordered_json& j, const std::string& key, const std::string& where) {
  return number(member(j, key, where), where + "." + key);
}

int integer_at(const ordered_json& j, const std::string& key, const std::string& where) {
  const ordered_json& v = member(j, key, where);
  if (!v.is_number_integer()) fail(where + "." + key, "expected an integer");
  return v.get<int>();
}

Eigen::VectorXd vector_from_array(const ordered_json& j, const std::string& where) {
  if (!j.is_array()) fail(where, "expected an array of numbers");
  Eigen::VectorXd v(j.size());
  for (size_t i = 0; i < j.size(); ++i) v[i] = number(j[i], where);
  return v;
}

struct CsvColumn {
  Eigen::VectorXd t_hours;
  Eigen::VectorXd values;
};

CsvColumn read_csv_column(const std::string& path, const std::string& column) {
  std::ifstream in(path);
  if (!in) fail(path, "cannot open CSV file");
  std::string line;
  if (!std::getline(in, line)) fail(path, "empty CSV file");
  std::vector<std::string> header;
  {
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) header.push_back(cell);
  }
  int t_col = -1, v_col = -1;
  for (size_t i = 0; i < header.size(); ++i) {
    if (header[i] == "t") t_col = static_cast<int>(i);
    if (header[i] == column) v_col = static_cast<int>(i);
  }
  if (t_col < 0) fail(path, "CSV header lacks a 't' column");
  if (v_col < 0) fail(path, "CSV header lacks a '" + column + "' column");

  std::vector<double> ts, vs;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string cell;
    std::vector<std::string> cells;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (static_cast<int>(cells.size()) <= std::max(t_col, v_col))
      fail(path, "short row at line " + std::to_string(lineno));
    try {
      ts.push_back(std::stod(cells[t_col]));
      vs.push_back(std::stod(cells[v_col]));
    } catch (const std::exception&) {
      fail(path, "non-numeric cell at line " + std::to_string(lineno));
    }
  }
  if (ts.empty()) fail(path, "CSV has no data rows");
  CsvColumn out;
  out.t_hours = Eigen::Map<Eigen::VectorXd>(ts.data(), ts.size());
  out.values = Eigen::Map<Eigen::VectorXd>(vs.data(), vs.size());
  return out;
}

// Accepts a series at the horizon resolution as-is; mean-downsamples one at an
// integer multiple of the horizon rate; rejects anything else.
Eigen::VectorXd resample(const CsvColumn& csv, const Horizon& h, const std::string& where) {
  const Eigen::Index n = csv.t_hours.size();
  if (n < 2) fail(where, "need at least two samples to infer resolution");
  const double native = csv.t_hours[1] - csv.t_hours[0];
  if (native <= 0.0) fail(where, "time column must strictly increase");
  for (Eigen::Index i = 1; i < n; ++i) {
    const double step = csv.t_hours[i] - csv.t_hours[i - 1];
    if (std::abs(step - native) > 1e-9)
      fail(where, "time column is not uniformly spaced");
  }
  const double ratio = h.dt_hours / native;
  const int k = static_cast<int>(std::lround(ratio));
  if (k < 1 || std::abs(ratio - k) > 1e-9)
    fail(where, "native resolution " + std::to_string(native) +
                    " h is not an integer refinement of dt = " +
                    std::to_string(h.dt_hours) + " h");
  if (n != static_cast<Eigen::Index>(h.steps) * k)
    fail(where, "profile length " + std::to_string(n) + " does not cover " +
                    std::to_string(h.steps) + " steps at dt " +
                    std::to_string(h.dt_hours));
  if (k == 1) return csv.values;
  Eigen::VectorXd out(h.steps);
  for (int t = 0; t < h.steps; ++t) out[t] = csv.values.segment(t * k, k).mean();
  return out;
}

Eigen::VectorXd load_series(const ordered_json& j, const Horizon& h,
                            const std::string& base_dir, const std::string& where) {
  if (j.is_array()) {
    Eigen::VectorXd v = vector_from_array(j, where);
    if (v.size() != h.steps)
      fail(where, "inline series has " + std::to_string(v.size()) +
                      " entries, horizon has " + std::to_string(h.steps) + " steps");
    return v;
  }
  if (j.is_object()) {
    const std::string file = member(j, "csv", where).get<std::string>();
    const std::string column =
        j.contains("column") ? j["column"].get<std::string>() : std::string("kw");
    const auto path = std::filesystem::path(base_dir) / file;
    return resample(read_csv_column(path.string(), column), h, where);
  }
  fail(where, "expected an array or a {\"csv\": ..., \"column\": ...} object");
}

DegradationCurve default_degradation(double charge_power_min_kw,
                                     double discharge_power_max_kw, double efficiency,
                                     double dt_hours) {
  // Five points spanning the reachable throughput range in either efficiency
  // placement, with quadratically increasing marginal slopes.
  const double g_lo = charge_power_min_kw * dt_hours * efficiency;
  const double g_hi = discharge_power_max_kw * dt_hours / efficiency;
  DegradationCurve c;
  c.breakpoints_kwh.resize(5);
  c.breakpoints_kwh << g_lo, g_lo / 2.0, 0.0, g_hi / 2.0, g_hi;
  c.slopes.resize(4);
  const double base = 0.002;
  for (int i = 0; i < 4; ++i) c.slopes[i] = base * (i + 1) * (i + 1);
  return c;
}

ordered_json series_json(const Eigen::VectorXd& v) {
  ordered_json a = ordered_json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}

ordered_json matrix_json(const Eigen::MatrixXd& m) {
  ordered_json rows = ordered_json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    ordered_json row = ordered_json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(row);
  }
  return rows;
}

} // namespace

Scenario scenario_from_json_text(const std::string& text, const std::string& base_dir) {
  ordered_json j;
  try {
    j = ordered_json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    fail("", std::string("invalid JSON: ") + e.what());
  }

  Scenario sc;
  const ordered_json& jh = member(j, "horizon", "scenario");
  sc.horizon.steps = integer_at(jh, "steps", "horizon");
  sc.horizon.dt_hours = number_at(jh, "dt_hours", "horizon");
  if (sc.horizon.steps < 1) fail("horizon.steps", "must be >= 1");
  if (!(sc.horizon.dt_hours > 0.0)) fail("horizon.dt_hours", "must be > 0");

  const ordered_json& jp = member(j, "prices", "scenario");
  sc.prices.buy = load_series(member(jp, "buy", "prices"), sc.horizon, base_dir, "prices.buy");
  sc.prices.sell =
      load_series(member(jp, "sell", "prices"), sc.horizon, base_dir, "prices.sell");
  if (jp.contains("community"))
    sc.prices.community =
        load_series(jp["community"], sc.horizon, base_dir, "prices.community");
  else
    sc.prices.community = 0.5 * (sc.prices.buy + sc.prices.sell);

  const ordered_json& jmgs = member(j, "microgrids", "scenario");
  if (!jmgs.is_array()) fail("microgrids", "expected an array");
  const int n = static_cast<int>(jmgs.size());

  for (const ordered_json& jmg : jmgs) {
    MicrogridSpec mg;
    mg.id = member(jmg, "id", "microgrid").get<std::string>();
    const std::string where = "microgrid '" + mg.id + "'";
    const ordered_json& loc = member(jmg, "location", where);
    mg.x = number_at(loc, "x", where + ".location");
    mg.y = number_at(loc, "y", where + ".location");
    mg.grid_import_max_kw = number_at(jmg, "grid_import_max_kw", where);
    mg.grid_export_min_kw = number_at(jmg, "grid_export_min_kw", where);
    mg.peer_default.import_max_kw = jmg.contains("peer_import_max_kw")
                                        ? number_at(jmg, "peer_import_max_kw", where)
                                        : mg.grid_import_max_kw;
    mg.peer_default.export_min_kw = jmg.contains("peer_export_min_kw")
                                        ? number_at(jmg, "peer_export_min_kw", where)
                                        : mg.grid_export_min_kw;
    if (jmg.contains("peer_overrides")) {
      for (auto it = jmg["peer_overrides"].begin(); it != jmg["peer_overrides"].end(); ++it) {
        PeerLimit lim;
        lim.import_max_kw = number_at(it.value(), "import_max_kw", where + ".peer_overrides");
        lim.export_min_kw = number_at(it.value(), "export_min_kw", where + ".peer_overrides");
        mg.peer_overrides[it.key()] = lim;
      }
    }
    mg.fixed_load_kw = load_series(member(jmg, "fixed_load_kw", where), sc.horizon,
                                   base_dir, where + ".fixed_load_kw");
    mg.pv_kw =
        load_series(member(jmg, "pv_kw", where), sc.horizon, base_dir, where + ".pv_kw");

    if (jmg.contains("storages")) {
      for (const ordered_json& je : jmg["storages"]) {
        EnergyStorageSpec es;
        es.id = member(je, "id", where + ".storages").get<std::string>();
        const std::string se = where + " storage '" + es.id + "'";
        es.capacity_max_kwh = number_at(je, "capacity_max_kwh", se);
        es.capacity_min_kwh = number_at(je, "capacity_min_kwh", se);
        es.initial_energy_kwh = number_at(je, "initial_energy_kwh", se);
        es.discharge_power_max_kw = number_at(je, "discharge_power_max_kw", se);
        es.charge_power_min_kw = number_at(je, "charge_power_min_kw", se);
        es.efficiency = number_at(je, "efficiency", se);
        if (je.contains("degradation")) {
          const ordered_json& jd = je["degradation"];
          es.degradation.breakpoints_kwh =
              vector_from_array(member(jd, "breakpoints_kwh", se), se + ".breakpoints_kwh");
          es.degradation.slopes =
              vector_from_array(member(jd, "slopes", se), se + ".slopes");
        } else {
          es.degradation =
              default_degradation(es.charge_power_min_kw, es.discharge_power_max_kw,
                                  es.efficiency, sc.horizon.dt_hours);
        }
        mg.storages.push_back(std::move(es));
      }
    }

    if (jmg.contains("evs")) {
      for (const ordered_json& je : jmg["evs"]) {
        ElectricVehicleSpec ev;
        ev.id = member(je, "id", where + ".evs").get<std::string>();
        const std::string se = where + " ev '" + ev.id + "'";
        ev.capacity_max_kwh = number_at(je, "capacity_max_kwh", se);
        ev.capacity_min_kwh = number_at(je, "capacity_min_kwh", se);
        ev.initial_energy_kwh = number_at(je, "initial_energy_kwh", se);
        ev.discharge_power_max_kw = number_at(je, "discharge_power_max_kw", se);
        ev.charge_power_min_kw = number_at(je, "charge_power_min_kw", se);
        ev.efficiency = number_at(je, "efficiency", se);
        for (const ordered_json& jw : member(je, "parking_windows", se)) {
          ParkingWindow pw;
          pw.start_step = integer_at(jw, "start_step", se + ".parking_windows");
          pw.end_step = integer_at(jw, "end_step", se + ".parking_windows");
          if (jw.contains("departure_energy_min_kwh"))
            pw.departure_energy_min_kwh =
                number(jw["departure_energy_min_kwh"], se + ".departure_energy_min_kwh");
          if (jw.contains("return_energy_kwh"))
            pw.return_energy_kwh = number(jw["return_energy_kwh"], se + ".return_energy_kwh");
          ev.windows.push_back(pw);
        }
        mg.evs.push_back(std::move(ev));
      }
    }

    if (jmg.contains("dispatchable_loads")) {
      for (const ordered_json& jl : jmg["dispatchable_loads"]) {
        DispatchableLoadSpec dl;
        dl.id = member(jl, "id", where + ".dispatchable_loads").get<std::string>();
        const std::string se = where + " load '" + dl.id + "'";
        const int type = integer_at(jl, "type", se);
        if (type != 1 && type != 2) fail(se + ".type", "must be 1 or 2");
        dl.kind = type == 1 ? LoadKind::Type1 : LoadKind::Type2;
        dl.power_kw = number_at(jl, "power_kw", se);
        dl.duration_steps = integer_at(jl, "duration_steps", se);
        for (const ordered_json& jw : member(jl, "windows", se)) {
          if (!jw.is_array() || jw.size() != 2)
            fail(se + ".windows", "each window must be a [begin, end) pair");
          StepInterval iv;
          iv.begin = jw[0].get<int>();
          iv.end = jw[1].get<int>();
          dl.windows.push_back(iv);
        }
        dl.total_energy_kwh =
            jl.contains("total_energy_kwh")
                ? number_at(jl, "total_energy_kwh", se)
                : dl.power_kw * dl.duration_steps * sc.horizon.dt_hours;
        mg.loads.push_back(std::move(dl));
      }
    }

    sc.microgrids.push_back(std::move(mg));
  }

  const ordered_json jt = j.contains("topology") ? j["topology"] : ordered_json::object();
  sc.topology.loss_factor_default =
      jt.contains("loss_factor_default") ? number_at(jt, "loss_factor_default", "topology")
                                         : 0.05;
  sc.topology.big_m = jt.contains("big_m") ? number_at(jt, "big_m", "topology") : 1e9;
  if (jt.contains("loss_factors")) {
    const ordered_json& jm = jt["loss_factors"];
    if (!jm.is_array() || static_cast<int>(jm.size()) != n)
      fail("topology.loss_factors", "expected an n x n array");
    sc.topology.loss_factors.resize(n, n);
    for (int i = 0; i < n; ++i) {
      if (!jm[i].is_array() || static_cast<int>(jm[i].size()) != n)
        fail("topology.loss_factors", "expected an n x n array");
      for (int k = 0; k < n; ++k)
        sc.topology.loss_factors(i, k) = number(jm[i][k], "topology.loss_factors");
    }
  } else {
    sc.topology.loss_factors =
        Eigen::MatrixXd::Constant(n, n, sc.topology.loss_factor_default);
  }
  if (jt.contains("connectivity")) {
    const ordered_json& jm = jt["connectivity"];
    if (!jm.is_array() || static_cast<int>(jm.size()) != n)
      fail("topology.connectivity", "expected an n x n array");
    sc.topology.connectivity.resize(n, n);
    for (int i = 0; i < n; ++i)
      for (int k = 0; k < n; ++k)
        sc.topology.connectivity(i, k) = jm[i][k].get<int>() != 0 ? 1 : 0;
  } else {
    sc.topology.connectivity = Eigen::MatrixXi::Ones(n, n);
    sc.topology.connectivity.diagonal().setZero();
  }

  validate_scenario(sc);
  return sc;
}

Scenario load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("scenario file '" + path + "'", "", "cannot open file");
  std::stringstream buf;
  buf << in.rdbuf();
  const std::string dir = std::filesystem::path(path).parent_path().string();
  return scenario_from_json_text(buf.str(), dir.empty() ? "." : dir);
}

std::string scenario_to_json_text(const Scenario& sc) {
  ordered_json j;
  j["horizon"] = {{"steps", sc.horizon.steps}, {"dt_hours", sc.horizon.dt_hours}};
  j["prices"] = {{"buy", series_json(sc.prices.buy)},
                 {"sell", series_json(sc.prices.sell)},
                 {"community", series_json(sc.prices.community)}};
  j["topology"] = {{"loss_factor_default", sc.topology.loss_factor_default},
                   {"loss_factors", matrix_json(sc.topology.loss_factors)},
                   {"big_m", sc.topology.big_m}};
  ordered_json conn = ordered_json::array();
  for (Eigen::Index i = 0; i < sc.topology.connectivity.rows(); ++i) {
    ordered_json row = ordered_json::array();
    for (Eigen::Index k = 0; k < sc.topology.connectivity.cols(); ++k)
      row.push_back(sc.topology.connectivity(i, k));
    conn.push_back(row);
  }
  j["topology"]["connectivity"] = conn;

  ordered_json jmgs = ordered_json::array();
  for (const MicrogridSpec& mg : sc.microgrids) {
    ordered_json jmg;
    jmg["id"] = mg.id;
    jmg["location"] = {{"x", mg.x}, {"y", mg.y}};
    jmg["grid_import_max_kw"] = mg.grid_import_max_kw;
    jmg["grid_export_min_kw"] = mg.grid_export_min_kw;
    jmg["peer_import_max_kw"] = mg.peer_default.import_max_kw;
    jmg["peer_export_min_kw"] = mg.peer_default.export_min_kw;
    if (!mg.peer_overrides.empty()) {
      ordered_json jo;
      for (const auto& [other, lim] : mg.peer_overrides)
        jo[other] = {{"import_max_kw", lim.import_max_kw},
                     {"export_min_kw", lim.export_min_kw}};
      jmg["peer_overrides"] = jo;
    }
    jmg["fixed_load_kw"] = series_json(mg.fixed_load_kw);
    jmg["pv_kw"] = series_json(mg.pv_kw);
    ordered_json jes = ordered_json::array();
    for (const EnergyStorageSpec& es : mg.storages) {
      jes.push_back({{"id", es.id},
                     {"capacity_max_kwh", es.capacity_max_kwh},
                     {"capacity_min_kwh", es.capacity_min_kwh},
                     {"initial_energy_kwh", es.initial_energy_kwh},
                     {"discharge_power_max_kw", es.discharge_power_max_kw},
                     {"charge_power_min_kw", es.charge_power_min_kw},
                     {"efficiency", es.efficiency},
                     {"degradation",
                      {{"breakpoints_kwh", series_json(es.degradation.breakpoints_kwh)},
                       {"slopes", series_json(es.degradation.slopes)}}}});
    }
    jmg["storages"] = jes;
    ordered_json jevs = ordered_json::array();
    for (const ElectricVehicleSpec& ev : mg.evs) {
      ordered_json je = {{"id", ev.id},
                         {"capacity_max_kwh", ev.capacity_max_kwh},
                         {"capacity_min_kwh", ev.capacity_min_kwh},
                         {"initial_energy_kwh", ev.initial_energy_kwh},
                         {"discharge_power_max_kw", ev.discharge_power_max_kw},
                         {"charge_power_min_kw", ev.charge_power_min_kw},
                         {"efficiency", ev.efficiency}};
      ordered_json jws = ordered_json::array();
      for (const ParkingWindow& pw : ev.windows) {
        ordered_json jw = {{"start_step", pw.start_step}, {"end_step", pw.end_step}};
        if (pw.departure_energy_min_kwh)
          jw["departure_energy_min_kwh"] = *pw.departure_energy_min_kwh;
        if (pw.return_energy_kwh) jw["return_energy_kwh"] = *pw.return_energy_kwh;
        jws.push_back(jw);
      }
      je["parking_windows"] = jws;
      jevs.push_back(je);
    }
    jmg["evs"] = jevs;
    ordered_json jls = ordered_json::array();
    for (const DispatchableLoadSpec& dl : mg.loads) {
      ordered_json jl = {{"id", dl.id},
                         {"type", dl.kind == LoadKind::Type1 ? 1 : 2},
                         {"power_kw", dl.power_kw},
                         {"duration_steps", dl.duration_steps}};
      ordered_json jws = ordered_json::array();
      for (const StepInterval& iv : dl.windows) jws.push_back({iv.begin, iv.end});
      jl["windows"] = jws;
      jl["total_energy_kwh"] = dl.total_energy_kwh;
      jls.push_back(jl);
    }
    jmg["dispatchable_loads"] = jls;
    jmgs.push_back(jmg);
  }
  j["microgrids"] = jmgs;
  return j.dump(2);
}

void save_scenario(const Scenario& sc, const std::string& path) {
  std::ofstream out(path);
  if (!out)
    throw ValidationError("scenario file '" + path + "'", "", "cannot open for writing");
  out << scenario_to_json_text(sc) << "\n";
}

std::string scenario_hash(const Scenario& sc) {
  const std::string text = scenario_to_json_text(sc);
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return std::string(buf);
}

} // namespace mgems
