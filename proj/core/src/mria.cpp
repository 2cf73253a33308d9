#include "gridrisk/mria.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include "gridrisk/csv.hpp"
#include "gridrisk/error.hpp"

namespace gridrisk {
namespace {

constexpr double kBalanceTolerance = 1e-6;

std::size_t index_of(const std::vector<std::string>& ids, std::string_view id, std::string_view what) {
  const auto it = std::lower_bound(ids.begin(), ids.end(), id);
  if (it == ids.end() || *it != id) throw ValidationError("unknown " + std::string(what) + " '" + std::string(id) + "'");
  return static_cast<std::size_t>(it - ids.begin());
}

std::vector<csv::Row> data_rows(const std::filesystem::path& path, std::size_t fields) {
  auto rows = csv::read_rows(path);
  if (!rows.empty() && csv::is_header(rows.front())) rows.erase(rows.begin());
  for (const auto& row : rows)
    if (row.fields.size() != fields)
      throw ParseError(path.string(), row.line, "expected " + std::to_string(fields) + " fields");
  return rows;
}

struct Route {
  std::size_t from, to, product;
};

std::vector<Route> routes(const SupplyUseModel& m, const MriaOptions& options) {
  std::vector<Route> out;
  if (!options.allow_trade) return out;
  for (std::size_t a = 0; a < m.nr(); ++a)
    for (std::size_t b = 0; b < m.nr(); ++b)
      for (std::size_t p = 0; p < m.np(); ++p)
        if (a != b && m.trade_allowed(a, b, p)) out.push_back({a, b, p});
  return out;
}

double penalty_for(const SupplyUseModel& model, const MriaOptions& options) {
  return options.rationing_penalty > 0.0 ? options.rationing_penalty : 10.0 * max_output_multiplier(model);
}

}  // namespace

SupplyUseModel::SupplyUseModel(std::vector<std::string> regions, std::vector<std::string> industries,
                               std::vector<std::string> products)
    : regions_(std::move(regions)), industries_(std::move(industries)), products_(std::move(products)) {
  for (const auto* ids : {&regions_, &industries_, &products_}) {
    if (ids->empty()) throw ValidationError("supply-use model needs at least one region, industry and product");
    if (!std::is_sorted(ids->begin(), ids->end()) || std::adjacent_find(ids->begin(), ids->end()) != ids->end())
      throw ValidationError("supply-use ids must be sorted and unique");
  }
  supply_.assign(nr() * ni() * np(), 0.0);
  use_.assign(nr() * np() * ni(), 0.0);
  final_demand_.assign(nr() * np(), 0.0);
  value_added_.assign(nr() * ni(), 0.0);
  trade_.assign(nr() * nr() * np(), 0);
}

std::size_t SupplyUseModel::region_index(std::string_view id) const { return index_of(regions_, id, "region"); }

std::vector<double> SupplyUseModel::baseline_output() const {
  std::vector<double> x0(nr() * ni(), 0.0);
  for (std::size_t r = 0; r < nr(); ++r)
    for (std::size_t i = 0; i < ni(); ++i)
      for (std::size_t p = 0; p < np(); ++p) x0[r * ni() + i] += supply(r, i, p);
  return x0;
}

std::vector<double> SupplyUseModel::net_exports() const {
  std::vector<double> e(nr() * np(), 0.0);
  for (std::size_t r = 0; r < nr(); ++r) {
    for (std::size_t p = 0; p < np(); ++p) {
      double s = 0.0, u = 0.0;
      for (std::size_t i = 0; i < ni(); ++i) {
        s += supply(r, i, p);
        u += use(r, p, i);
      }
      e[r * np() + p] = s - u - final_demand(r, p);
    }
  }
  return e;
}

void SupplyUseModel::validate_entries() const {
  auto check = [](const std::vector<double>& v, const char* what) {
    for (double x : v)
      if (!(x >= 0.0) || !std::isfinite(x)) throw ValidationError(std::string(what) + " entries must be finite and >= 0");
  };
  check(supply_, "supply");
  check(use_, "use");
  check(final_demand_, "final demand");
  check(value_added_, "value added");
  for (double v : value_added_)
    if (v > 1.0) throw ValidationError("value-added coefficients must be <= 1");
  if (!(alpha >= 0.0) || !std::isfinite(alpha)) throw ValidationError("overcapacity alpha must be >= 0");
}

void SupplyUseModel::validate_balance() const {
  const auto e = net_exports();
  double worst = 0.0;
  std::string where;
  auto consider = [&](double relative, const std::string& label) {
    if (relative > kBalanceTolerance && relative > worst) {
      worst = relative;
      where = label;
    }
  };
  std::vector<double> product_scale(np(), 0.0), product_sum(np(), 0.0);
  for (std::size_t r = 0; r < nr(); ++r) {
    for (std::size_t p = 0; p < np(); ++p) {
      double scale = final_demand(r, p);
      for (std::size_t i = 0; i < ni(); ++i) scale += supply(r, i, p) + use(r, p, i);
      scale = std::max(scale, 1.0);
      bool imports = false, exports = false;
      for (std::size_t o = 0; o < nr(); ++o) {
        if (o == r) continue;
        imports = imports || trade_allowed(o, r, p);
        exports = exports || trade_allowed(r, o, p);
      }
      const double residual = e[r * np() + p];
      if ((residual < 0 && !imports) || (residual > 0 && !exports))
        consider(std::abs(residual) / scale, "(" + regions_[r] + ", " + products_[p] + ")");
      product_scale[p] += scale;
      product_sum[p] += residual;
    }
  }
  for (std::size_t p = 0; p < np(); ++p)
    consider(std::abs(product_sum[p]) / product_scale[p], "(all regions, " + products_[p] + ")");
  if (worst > 0.0)
    throw UnbalancedTables("supply-use tables do not balance; worst residual at " + where + ", relative " +
                           csv::format_double(worst));
}

SupplyUseModel load_supply_use(const std::filesystem::path& dir) {
  const auto supply = data_rows(dir / "supply.csv", 4);
  const auto use = data_rows(dir / "use.csv", 4);
  const auto fd = data_rows(dir / "final_demand.csv", 3);
  const auto va = data_rows(dir / "value_added.csv", 3);
  std::vector<csv::Row> trade;
  if (std::filesystem::exists(dir / "trade.csv")) trade = data_rows(dir / "trade.csv", 4);

  std::set<std::string> regions, industries, products;
  for (const auto& r : supply) {
    regions.insert(r.fields[0]);
    industries.insert(r.fields[1]);
    products.insert(r.fields[2]);
  }
  for (const auto& r : use) {
    regions.insert(r.fields[0]);
    products.insert(r.fields[1]);
    industries.insert(r.fields[2]);
  }
  for (const auto& r : fd) {
    regions.insert(r.fields[0]);
    products.insert(r.fields[1]);
  }
  SupplyUseModel m({regions.begin(), regions.end()}, {industries.begin(), industries.end()},
                   {products.begin(), products.end()});

  auto wrap = [](const std::filesystem::path& file, std::size_t line, auto&& f) {
    try {
      f();
    } catch (const ParseError&) {
      throw;
    } catch (const ValidationError& e) {
      throw ParseError(file.string(), line, e.what());
    }
  };
  const auto& R = m.regions();
  const auto& I = m.industries();
  const auto& P = m.products();
  for (const auto& row : supply) {
    wrap(dir / "supply.csv", row.line, [&] {
      m.supply(index_of(R, row.fields[0], "region"), index_of(I, row.fields[1], "industry"),
               index_of(P, row.fields[2], "product")) += csv::parse_double(row.fields[3], "supply.csv", row.line);
    });
  }
  for (const auto& row : use) {
    wrap(dir / "use.csv", row.line, [&] {
      m.use(index_of(R, row.fields[0], "region"), index_of(P, row.fields[1], "product"),
            index_of(I, row.fields[2], "industry")) += csv::parse_double(row.fields[3], "use.csv", row.line);
    });
  }
  for (const auto& row : fd) {
    wrap(dir / "final_demand.csv", row.line, [&] {
      m.final_demand(index_of(R, row.fields[0], "region"), index_of(P, row.fields[1], "product")) +=
          csv::parse_double(row.fields[2], "final_demand.csv", row.line);
    });
  }
  for (const auto& row : va) {
    wrap(dir / "value_added.csv", row.line, [&] {
      m.value_added(index_of(R, row.fields[0], "region"), index_of(I, row.fields[1], "industry")) =
          csv::parse_double(row.fields[2], "value_added.csv", row.line);
    });
  }
  for (const auto& row : trade) {
    wrap(dir / "trade.csv", row.line, [&] {
      const auto allowed = csv::parse_int(row.fields[3], "trade.csv", row.line);
      if (allowed != 0 && allowed != 1) throw ValidationError("allowed must be 0 or 1");
      m.trade_allowed(index_of(R, row.fields[0], "region"), index_of(R, row.fields[1], "region"),
                      index_of(P, row.fields[2], "product")) = static_cast<char>(allowed);
    });
  }
  m.validate_entries();
  m.validate_balance();
  return m;
}

void write_supply_use(const SupplyUseModel& m, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  const auto& R = m.regions();
  const auto& I = m.industries();
  const auto& P = m.products();
  std::string s = "region,industry,product,value\n", u = "region,product,industry,value\n",
              f = "region,product,value\n", v = "region,industry,coefficient\n", t = "from,to,product,allowed\n";
  for (std::size_t r = 0; r < m.nr(); ++r) {
    for (std::size_t i = 0; i < m.ni(); ++i) {
      for (std::size_t p = 0; p < m.np(); ++p) {
        if (m.supply(r, i, p) != 0.0) s += R[r] + ',' + I[i] + ',' + P[p] + ',' + csv::format_double(m.supply(r, i, p)) + '\n';
      }
      v += R[r] + ',' + I[i] + ',' + csv::format_double(m.value_added(r, i)) + '\n';
    }
    for (std::size_t p = 0; p < m.np(); ++p) {
      for (std::size_t i = 0; i < m.ni(); ++i)
        if (m.use(r, p, i) != 0.0) u += R[r] + ',' + P[p] + ',' + I[i] + ',' + csv::format_double(m.use(r, p, i)) + '\n';
      f += R[r] + ',' + P[p] + ',' + csv::format_double(m.final_demand(r, p)) + '\n';
    }
    for (std::size_t b = 0; b < m.nr(); ++b)
      if (b != r)
        for (std::size_t p = 0; p < m.np(); ++p)
          t += R[r] + ',' + R[b] + ',' + P[p] + ',' + (m.trade_allowed(r, b, p) ? "1" : "0") + '\n';
  }
  csv::write_file(dir / "supply.csv", s);
  csv::write_file(dir / "use.csv", u);
  csv::write_file(dir / "final_demand.csv", f);
  csv::write_file(dir / "value_added.csv", v);
  csv::write_file(dir / "trade.csv", t);
}

TechnologyCoefficients technology_coefficients(const SupplyUseModel& m) {
  const auto x0 = m.baseline_output();
  TechnologyCoefficients c;
  c.input.assign(m.nr() * m.np() * m.ni(), 0.0);
  c.share.assign(m.nr() * m.ni() * m.np(), 0.0);
  for (std::size_t r = 0; r < m.nr(); ++r) {
    for (std::size_t i = 0; i < m.ni(); ++i) {
      const double x = x0[r * m.ni() + i];
      if (x <= 0.0) continue;
      for (std::size_t p = 0; p < m.np(); ++p) {
        c.input[(r * m.np() + p) * m.ni() + i] = m.use(r, p, i) / x;
        c.share[(r * m.ni() + i) * m.np() + p] = m.supply(r, i, p) / x;
      }
    }
  }
  return c;
}

double max_output_multiplier(const SupplyUseModel& m) {
  const auto tc = technology_coefficients(m);
  const std::size_t n = m.ni();
  double best = 1.0;
  for (std::size_t r = 0; r < m.nr(); ++r) {
    std::vector<double> product_total(m.np(), 0.0);
    for (std::size_t p = 0; p < m.np(); ++p)
      for (std::size_t i = 0; i < n; ++i) product_total[p] += m.supply(r, i, p);
    // I - A with A[k][i] = sum_p (share of industry k in product p) * a[p][i]
    DenseMatrix lhs = DenseMatrix::identity(n);
    for (std::size_t k = 0; k < n; ++k) {
      for (std::size_t i = 0; i < n; ++i) {
        double a = 0.0;
        for (std::size_t p = 0; p < m.np(); ++p)
          if (product_total[p] > 0.0) a += m.supply(r, k, p) / product_total[p] * tc.input[(r * m.np() + p) * n + i];
        lhs(k, i) -= a;
      }
    }
    DenseMatrix inv;
    try {
      inv = LuFactorization(lhs).inverse();
    } catch (const SingularMatrix&) {
      throw ValidationError("technology of region '" + m.regions()[r] + "' has no Leontief inverse");
    }
    for (std::size_t i = 0; i < n; ++i) {
      double col = 0.0;
      for (std::size_t k = 0; k < n; ++k) col += inv(k, i);
      best = std::max(best, col);
    }
  }
  return best;
}

CapacityShock CapacityShock::none(const SupplyUseModel& model) {
  CapacityShock s;
  s.delta.assign(model.nr() * model.ni(), 0.0);
  return s;
}

CapacityShock CapacityShock::uniform(const SupplyUseModel& model, const std::vector<double>& per_region) {
  if (per_region.size() != model.nr()) throw ValidationError("shock needs one value per region");
  CapacityShock s = none(model);
  for (std::size_t r = 0; r < model.nr(); ++r)
    for (std::size_t i = 0; i < model.ni(); ++i) s.delta[r * model.ni() + i] = per_region[r];
  return s;
}

bool CapacityShock::is_zero() const {
  return std::all_of(delta.begin(), delta.end(), [](double d) { return d == 0.0; });
}

std::vector<double> ImpactResult::regional_cost(std::size_t regions, std::size_t industries) const {
  std::vector<double> out(regions, 0.0);
  for (std::size_t r = 0; r < regions; ++r)
    for (std::size_t i = 0; i < industries; ++i) out[r] -= std::min(0.0, delta_va[r * industries + i]);
  return out;
}

LinearProgram impact_lp(const SupplyUseModel& m, const CapacityShock& shock, const MriaOptions& options) {
  m.validate_entries();
  if (shock.delta.size() != m.nr() * m.ni()) throw ValidationError("shock has the wrong size");
  for (double d : shock.delta)
    if (!(d >= 0.0 && d <= 1.0)) throw ValidationError("shock fractions must be in [0, 1]");
  const auto tc = technology_coefficients(m);
  const auto x0 = m.baseline_output();
  const auto trade = routes(m, options);
  const std::size_t nx = m.nr() * m.ni();
  const std::size_t nt = trade.size();
  const std::size_t nm = m.nr() * m.np();
  const double penalty = penalty_for(m, options);

  auto lp = LinearProgram::with_variables(nx + nt + nm);
  for (std::size_t k = 0; k < nx; ++k) {
    lp.objective[k] = 1.0;
    lp.upper[k] = (1.0 - shock.delta[k]) * (1.0 + m.alpha) * x0[k];
  }
  for (std::size_t k = 0; k < nt; ++k) lp.objective[nx + k] = options.trade_cost;
  for (std::size_t r = 0; r < m.nr(); ++r) {
    for (std::size_t p = 0; p < m.np(); ++p) {
      const std::size_t k = nx + nt + r * m.np() + p;
      lp.objective[k] = penalty;
      lp.upper[k] = m.final_demand(r, p);
    }
  }
  // use + exports - supply - imports - rationing <= -final demand
  std::vector<double> row(nx + nt + nm);
  for (std::size_t r = 0; r < m.nr(); ++r) {
    for (std::size_t p = 0; p < m.np(); ++p) {
      std::fill(row.begin(), row.end(), 0.0);
      for (std::size_t i = 0; i < m.ni(); ++i)
        row[r * m.ni() + i] = tc.input[(r * m.np() + p) * m.ni() + i] - tc.share[(r * m.ni() + i) * m.np() + p];
      for (std::size_t k = 0; k < nt; ++k) {
        if (trade[k].product != p) continue;
        if (trade[k].from == r) row[nx + k] += 1.0;
        if (trade[k].to == r) row[nx + k] -= 1.0;
      }
      row[nx + nt + r * m.np() + p] = -1.0;
      lp.add_inequality(row, -m.final_demand(r, p));
    }
  }
  return lp;
}

namespace {

ImpactResult solve_impact(const SupplyUseModel& m, const CapacityShock& shock, const MriaOptions& options) {
  const auto lp = impact_lp(m, shock, options);
  const auto sol = lp_solve(lp, options.lp);
  if (sol.status != LpStatus::optimal) throw NumericalBreakdown("impact LP did not reach an optimum");
  const auto x0 = m.baseline_output();
  const std::size_t nx = m.nr() * m.ni();
  const std::size_t nm = m.nr() * m.np();
  const std::size_t offset = lp.num_variables() - nm;
  const auto per_event = [&](double annual) { return annual * shock.duration_hours / kHoursPerYearD; };

  ImpactResult out;
  out.objective = sol.objective_value;
  out.output.assign(sol.x.begin(), sol.x.begin() + static_cast<std::ptrdiff_t>(nx));
  out.delta_va.resize(nx);
  for (std::size_t k = 0; k < nx; ++k) {
    // Solver noise around an unchanged output is not a change in value added.
    if (std::abs(out.output[k] - x0[k]) <= 1e-9 * std::max(1.0, x0[k])) out.output[k] = x0[k];
    const double annual = m.value_added(k / m.ni(), k % m.ni()) * (out.output[k] - x0[k]);
    out.annual_total_cost -= std::min(0.0, annual);
    out.delta_va[k] = per_event(annual);
  }
  out.rationing.resize(nm);
  for (std::size_t k = 0; k < nm; ++k) {
    const double v = sol.x[offset + k];
    out.rationing[k] = per_event(v <= 1e-9 * std::max(1.0, m.final_demand(k / m.np(), k % m.np())) ? 0.0 : v);
  }
  out.total_cost = per_event(out.annual_total_cost);
  return out;
}

}  // namespace

std::vector<double> solve_baseline(const SupplyUseModel& m, const MriaOptions& options) {
  const auto lp = impact_lp(m, CapacityShock::none(m), options);
  const auto sol = lp_solve(lp, options.lp);
  if (sol.status != LpStatus::optimal) throw BaselineMismatch("baseline LP has no optimum");
  const auto x0 = m.baseline_output();
  for (std::size_t k = 0; k < x0.size(); ++k) {
    if (std::abs(sol.x[k] - x0[k]) > 1e-6 * std::max(1.0, x0[k])) {
      throw BaselineMismatch("baseline output of (" + m.regions()[k / m.ni()] + ", " + m.industries()[k % m.ni()] +
                             ") is " + csv::format_double(sol.x[k]) + ", tables say " + csv::format_double(x0[k]));
    }
  }
  const std::size_t nm = m.nr() * m.np();
  for (std::size_t k = 0; k < nm; ++k) {
    const double v = sol.x[lp.num_variables() - nm + k];
    if (v > 1e-6 * std::max(1.0, m.final_demand(k / m.np(), k % m.np())))
      throw BaselineMismatch("baseline rations final demand in (" + m.regions()[k / m.np()] + ", " +
                             m.products()[k % m.np()] + ")");
  }
  return std::vector<double>(sol.x.begin(), sol.x.begin() + static_cast<std::ptrdiff_t>(x0.size()));
}

ImpactResult assess_impact(const SupplyUseModel& m, const CapacityShock& shock, const MriaOptions& options) {
  if (!(shock.duration_hours > 0.0)) throw ValidationError("event duration must be > 0");
  return solve_impact(m, shock, options);
}

CapacityShock shock_from_unserved(const ScenarioRecord& record, const std::vector<std::string>& record_regions,
                                  const RegionTable& regions, const DemandProfile& profile,
                                  const SupplyUseModel& model) {
  if (record.unserved_mw_per_region.size() != record_regions.size())
    throw ValidationError("record does not match its region list");
  const auto position = profile.hour_position(record.hour);
  std::vector<double> unserved(model.nr(), 0.0), demand(model.nr(), 0.0);
  for (std::size_t k = 0; k < record_regions.size(); ++k) {
    const auto& district = regions.at(record_regions[k]);
    const auto r = model.region_index(district.parent);
    unserved[r] += record.unserved_mw_per_region[k];
    demand[r] += profile.at(profile.region_index(district.id), position);
  }
  std::vector<double> per_region(model.nr(), 0.0);
  for (std::size_t r = 0; r < model.nr(); ++r)
    per_region[r] = demand[r] > 0.0 ? std::min(1.0, unserved[r] / demand[r]) : 0.0;
  return CapacityShock::uniform(model, per_region);
}

}  // namespace gridrisk
