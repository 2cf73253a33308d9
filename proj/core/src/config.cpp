#include "gridrisk/config.hpp"

#include <algorithm>
#include <cctype>
#include <set>

#include "gridrisk/csv.hpp"
#include "gridrisk/error.hpp"

namespace gridrisk {
namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split_list(const std::string& value) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start <= value.size()) {
    const auto comma = value.find(',', start);
    const auto item = trim(std::string_view(value).substr(start, comma == std::string::npos ? std::string::npos : comma - start));
    if (!item.empty()) out.push_back(item);
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return out;
}

bool parse_bool(const std::string& v, const std::string& source, std::size_t line) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw ParseError(source, line, "expected true or false, got '" + v + "'");
}

std::size_t parse_count(const std::string& v, const std::string& source, std::size_t line) {
  const auto n = csv::parse_int(v, source, line);
  if (n < 0) throw ParseError(source, line, "expected a non-negative integer");
  return static_cast<std::size_t>(n);
}

bool is_hour_list(const std::string& v) {
  return !v.empty() && std::all_of(v.begin(), v.end(), [](char c) { return std::isdigit(static_cast<unsigned char>(c)) || c == ',' || c == ' '; });
}

}  // namespace

void RunConfig::validate() const {
  experiment.validate();
  scenario.validate();
  if (scenarios.empty()) throw ValidationError("no scenarios selected");
  if (!(calibration.headroom_factor >= 1.0)) throw ValidationError("headroom must be >= 1");
  if (!(overcapacity >= 0.0)) throw ValidationError("overcapacity must be >= 0");
  if (!(mria.trade_cost >= 0.0) || !(mria.rationing_penalty >= 0.0)) throw ValidationError("MRIA costs must be >= 0");
  if (!(analysis_fraction >= 0.0 && analysis_fraction <= 1.0)) throw ValidationError("analysis_fraction must be in [0, 1]");
  if (hours != "peak" && hours != "peak_day" && hours != "extreme_days" && !is_hour_list(hours))
    throw ValidationError("hours must be peak, peak_day, extreme_days or a list of hour indices");
}

RunConfig parse_config(std::string_view text, const std::filesystem::path& base_dir, const std::string& source) {
  RunConfig c;
  std::set<std::string> seen;
  auto path = [&](const std::string& v) {
    const std::filesystem::path p(v);
    return p.is_absolute() || base_dir.empty() ? p : base_dir / p;
  };
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto nl = text.find('\n', pos);
    std::string_view raw = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
    pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
    ++line_no;
    if (const auto hash = raw.find('#'); hash != std::string_view::npos) raw = raw.substr(0, hash);
    const auto line = trim(raw);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ParseError(source, line_no, "expected key = value");
    const auto key = trim(std::string_view(line).substr(0, eq));
    const auto v = trim(std::string_view(line).substr(eq + 1));
    if (!seen.insert(key).second) throw ParseError(source, line_no, "duplicate key '" + key + "'");
    auto num = [&] { return csv::parse_double(v, source, line_no); };

    if (key == "grid") c.grid_file = path(v);
    else if (key == "regions") c.regions_file = path(v);
    else if (key == "demand") c.profile_file = path(v);
    else if (key == "heat") c.heat_file = path(v);
    else if (key == "end_use_shares") c.shares_file = path(v);
    else if (key == "supply_use") c.supply_use_dir = path(v);
    else if (key == "out") c.out_dir = path(v);
    else if (key == "scenarios") {
      c.scenarios.clear();
      for (const auto& s : split_list(v)) {
        try {
          c.scenarios.push_back(parse_scenario(s));
        } catch (const ValidationError& e) {
          throw ParseError(source, line_no, e.what());
        }
      }
    } else if (key == "hours") c.hours = v;
    else if (key == "orderings") c.experiment.n_orderings = parse_count(v, source, line_no);
    else if (key == "fractions") {
      c.experiment.loss_fractions.clear();
      for (const auto& s : split_list(v)) c.experiment.loss_fractions.push_back(csv::parse_double(s, source, line_no));
    } else if (key == "seed") c.experiment.master_seed = parse_count(v, source, line_no);
    else if (key == "shed_step") c.experiment.shed_step = num();
    else if (key == "interconnector_penalty") c.experiment.interconnector_penalty = num();
    else if (key == "impedance_distance") c.experiment.impedance_weighted = parse_bool(v, source, line_no);
    else if (key == "workers") c.experiment.workers = parse_count(v, source, line_no);
    else if (key == "hp_penetration") c.scenario.hp_penetration = num();
    else if (key == "hp_cop") c.scenario.hp_cop = num();
    else if (key.rfind("efficiency.", 0) == 0) c.scenario.efficiency_factors[key.substr(11)] = num();
    else if (key == "headroom") c.calibration.headroom_factor = num();
    else if (key == "overcapacity") c.overcapacity = num();
    else if (key == "rationing_penalty") c.mria.rationing_penalty = num();
    else if (key == "trade_cost") c.mria.trade_cost = num();
    else if (key == "allow_trade") c.mria.allow_trade = parse_bool(v, source, line_no);
    else if (key == "analysis_fraction") c.analysis_fraction = num();
    else throw ParseError(source, line_no, "unknown key '" + key + "'");
  }
  c.calibration.interconnector_penalty = c.experiment.interconnector_penalty;
  c.calibration.impedance_weighted = c.experiment.impedance_weighted;
  try {
    c.validate();
  } catch (const ParseError&) {
    throw;
  } catch (const ValidationError& e) {
    throw ValidationError(source + ": " + e.what());
  }
  return c;
}

RunConfig load_config(const std::filesystem::path& path) {
  return parse_config(csv::read_text(path), path.parent_path(), path.string());
}

std::string config_to_text(const RunConfig& c) {
  std::string out;
  auto put = [&](std::string_view key, const std::string& value) {
    out += key;
    out += " = ";
    out += value;
    out += '\n';
  };
  auto num = [](double v) { return csv::format_double(v); };
  out += "# inputs\n";
  put("grid", c.grid_file.generic_string());
  put("regions", c.regions_file.generic_string());
  put("demand", c.profile_file.generic_string());
  put("heat", c.heat_file.generic_string());
  put("end_use_shares", c.shares_file.generic_string());
  put("supply_use", c.supply_use_dir.generic_string());
  put("out", c.out_dir.generic_string());
  out += "\n# experiment\n";
  std::string list;
  for (auto s : c.scenarios) list += (list.empty() ? "" : ", ") + std::string(to_string(s));
  put("scenarios", list);
  put("hours", c.hours);
  put("orderings", std::to_string(c.experiment.n_orderings));
  list.clear();
  for (double f : c.experiment.loss_fractions) list += (list.empty() ? "" : ", ") + num(f);
  put("fractions", list);
  put("seed", std::to_string(c.experiment.master_seed));
  put("shed_step", num(c.experiment.shed_step));
  put("interconnector_penalty", num(c.experiment.interconnector_penalty));
  put("impedance_distance", c.experiment.impedance_weighted ? "true" : "false");
  put("workers", std::to_string(c.experiment.workers));
  out += "\n# scenarios\n";
  put("hp_penetration", num(c.scenario.hp_penetration));
  put("hp_cop", num(c.scenario.hp_cop));
  for (const auto& [use, f] : c.scenario.efficiency_factors) put("efficiency." + use, num(f));
  out += "\n# calibration and economy\n";
  put("headroom", num(c.calibration.headroom_factor));
  put("overcapacity", num(c.overcapacity));
  put("rationing_penalty", num(c.mria.rationing_penalty));
  put("trade_cost", num(c.mria.trade_cost));
  put("allow_trade", c.mria.allow_trade ? "true" : "false");
  put("analysis_fraction", num(c.analysis_fraction));
  return out;
}

}  // namespace gridrisk
