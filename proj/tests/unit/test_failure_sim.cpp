#include <cmath>
#include <map>

#include "doctest.h"
#include "gridrisk/error.hpp"
#include "gridrisk/failure_sim.hpp"
#include "networks.hpp"

using namespace gridrisk;
using testnet::bus;
using testnet::gen;
using testnet::line;

namespace {

const std::string kData = GRIDRISK_TEST_DATA;

// Hub with n equal generators feeding demand bus D1 (region R0) over a huge line.
Grid copper_plate(std::size_t n, double each_mw, bool with_solar = false) {
  Bus d = bus("D1");
  d.region = "R0";
  std::vector<Generator> gens;
  for (std::size_t i = 0; i < n; ++i) {
    const std::string s = std::to_string(i);
    gens.push_back(gen("G" + std::string(3 - s.size(), '0') + s, "HUB", each_mw));
  }
  if (with_solar) gens.push_back(gen("SUN", "HUB", 500, Technology::solar));
  return Grid({bus("HUB"), d}, {line("L", "HUB", "D1", 100, 1e9)}, gens);
}

DemandProfile single_hour(double mw) {
  DemandProfile p("current", {"R0"}, {0});
  p.at(0, 0) = mw;
  return p;
}

ExperimentConfig config_for(std::vector<double> fractions, std::size_t orderings) {
  ExperimentConfig c;
  c.n_orderings = orderings;
  c.loss_fractions = std::move(fractions);
  c.hours = {{"current", 0}};
  c.master_seed = 42;
  return c;
}

}  // namespace

TEST_CASE("orderings: trivial, deterministic, international excluded") {
  const Grid one({bus("A")}, {}, {gen("G", "A", 1), gen("I", "A", 1, Technology::interconnector)});
  CHECK(generate_ordering(one, 1, 0) == Ordering{0});
  const auto g = copper_plate(20, 1.0);
  CHECK(generate_ordering(g, 9, 3) == generate_ordering(g, 9, 3));
  CHECK(generate_ordering(g, 9, 3) != generate_ordering(g, 9, 4));
  const auto all = generate_orderings(g, 5, 9);
  REQUIRE(all.size() == 5);
  CHECK(all[3] == generate_ordering(g, 9, 3));
  auto sorted = all[0];
  std::sort(sorted.begin(), sorted.end());
  for (std::size_t i = 0; i < sorted.size(); ++i) CHECK(sorted[i] == i);
}

TEST_CASE("orderings are uniform in mean rank") {
  const auto g = copper_plate(5, 1.0);
  const int n = 10000;
  std::vector<double> rank_sum(5, 0.0);
  for (int i = 0; i < n; ++i) {
    const auto o = generate_ordering(g, 2024, static_cast<std::size_t>(i));
    for (std::size_t pos = 0; pos < o.size(); ++pos) rank_sum[o[pos]] += static_cast<double>(pos);
  }
  // rank uniform on {0..4}: mean 2, variance 2
  const double se = std::sqrt(2.0 / n);
  for (double s : rank_sum) CHECK(std::abs(s / n - 2.0) <= 3.0 * se);
}

TEST_CASE("removal sets") {
  const Grid g({bus("A")}, {}, {gen("G10", "A", 10), gen("G20", "A", 20), gen("G30", "A", 30)});
  const Ordering o{0, 1, 2};
  CHECK(removal_set(o, g, 0.0).empty());
  CHECK(removal_set(o, g, 0.4) == std::vector<std::size_t>{0, 1});
  CHECK(removal_set(o, g, 1.0) == std::vector<std::size_t>{0, 1, 2});
  CHECK(removal_set(o, g, 0.5) == std::vector<std::size_t>{0, 1});  // exactly 30 MW
  CHECK_THROWS_AS(removal_set(o, g, 1.5), ValidationError);

  const auto big = copper_plate(37, 3.0);
  for (std::size_t s = 0; s < 20; ++s) {
    const auto ord = generate_ordering(big, 1, s);
    std::vector<std::size_t> previous;
    for (double f : default_loss_fractions()) {
      const auto r = removal_set(ord, big, f);
      CHECK(r.size() >= previous.size());
      CHECK(std::equal(previous.begin(), previous.end(), r.begin()));
      previous = r;
    }
  }
}

TEST_CASE("experiment extremes") {
  const auto g = copper_plate(10, 10.0);
  ProfileSet profiles{{"current", single_hour(50.0)}};
  const auto t = run_experiment(g, profiles, config_for({0.0, 1.0}, 4));
  REQUIRE(t.records.size() == 8);
  CHECK(t.regions == std::vector<std::string>{"R0"});
  for (const auto& rec : t.records) {
    if (rec.loss_fraction == 0.0) {
      CHECK(rec.total_unserved_mw == 0.0);
      CHECK(rec.status == RecordStatus::feasible);
    } else {
      CHECK(rec.total_unserved_mw == doctest::Approx(50.0));
    }
  }
}

TEST_CASE("copper-plate energy balance in the sweep") {
  // 100 MW derated, 80 MW demand, 30% lost -> 10 MW unserved
  const auto g = copper_plate(10, 10.0);
  ProfileSet profiles{{"current", single_hour(80.0)}};
  const auto t = run_experiment(g, profiles, config_for({0.3}, 6));
  for (const auto& rec : t.records) {
    CHECK(rec.total_unserved_mw >= 10.0 - 1e-6);
    CHECK(rec.total_unserved_mw <= 10.0 + 0.1 * 80.0 + 1e-6);
  }
}

TEST_CASE("solar is never dispatched") {
  const auto g = copper_plate(10, 10.0, true);
  ProfileSet profiles{{"current", single_hour(120.0)}};
  const auto t = run_experiment(g, profiles, config_for({0.0}, 1));
  CHECK(t.records[0].total_unserved_mw >= 20.0 - 1e-6);
}

TEST_CASE("first impact on a copper plate sits at the spare-capacity margin") {
  // 100 x 1 MW; demand 70 MW -> first shedding once 30% is lost
  const auto g = copper_plate(100, 1.0);
  ProfileSet profiles{{"current", single_hour(70.0)}};
  std::vector<double> fractions;
  for (int i = 0; i <= 20; ++i) fractions.push_back(i * 5 / 100.0);
  const auto t = run_experiment(g, profiles, config_for(fractions, 5));
  for (std::size_t o = 0; o < 5; ++o) {
    double first = -1.0;
    for (const auto& rec : t.records)
      if (rec.ordering_index == o && rec.total_unserved_mw > 0 && first < 0) first = rec.loss_fraction;
    CHECK(std::abs(first - 0.30) <= 0.05 + 1e-12);
  }
}

TEST_CASE("workers do not change the results") {
  const auto g = load_grid(kData + "/five_bus.csv");
  DemandProfile p("current", {"D1", "D2"}, {0, 1});
  p.at(0, 0) = 150;
  p.at(1, 0) = 140;
  p.at(0, 1) = 90;
  p.at(1, 1) = 60;
  ProfileSet profiles{{"current", p}};
  auto c = config_for(default_loss_fractions(), 12);
  c.hours = {{"current", 1}, {"current", 0}};
  const auto a = run_experiment(g, profiles, c);
  c.workers = 4;
  const auto b = run_experiment(g, profiles, c);
  CHECK(a == b);
  CHECK(results_to_csv(a) == results_to_csv(b));
  // sorted by (ordering, fraction, scenario, hour)
  CHECK(a.records[0].hour == 0);
  CHECK(a.records[1].hour == 1);
  for (const auto& rec : a.records) {
    double s = 0.0;
    for (double v : rec.unserved_mw_per_region) s += v;
    CHECK(std::abs(s - rec.total_unserved_mw) <= 1e-6);
  }
}

TEST_CASE("results CSV round trip") {
  const auto g = load_grid(kData + "/five_bus.csv");
  DemandProfile p("current", {"D1", "D2"}, {7});
  p.at(0, 0) = 150;
  p.at(1, 0) = 140;
  const auto t = run_experiment(g, ProfileSet{{"current", p}}, [] {
    auto c = config_for(default_loss_fractions(), 3);
    c.hours = {{"current", 7}};
    return c;
  }());
  const auto csv_text = results_to_csv(t);
  CHECK(csv_text.rfind("ordering,fraction,scenario,hour,region,unserved_mw,status\n", 0) == 0);
  const auto back = parse_results(csv_text);
  CHECK(back == t);
  CHECK_THROWS_AS(parse_results("0,0,current,7,D1,0,bogus\n"), ParseError);
  CHECK_THROWS_AS(parse_results("0,0,current,7,D1,0,feasible\n0,0,current,7,D2,0,feasible\n1,0,current,7,D1,0,feasible\n"),
                  ValidationError);
}

TEST_CASE("calibration") {
  const Grid g({bus("A"), bus("D1")}, {line("L", "A", "D1", 10, 50)}, {gen("G", "A", 200)});
  DemandProfile p("current", {"R"}, {0});
  p.at(0, 0) = 100.0;
  const auto c = calibrate_ratings(g, p);
  CHECK(c.branches()[0].rating_mw == doctest::Approx(120.0));

  const Grid roomy({bus("A"), bus("D1")}, {line("L", "A", "D1", 10, 500)}, {gen("G", "A", 200)});
  CHECK(calibrate_ratings(roomy, p) == roomy);

  // fixture: post-calibration zero-removal dispatch sheds nothing at the peak
  const auto five = load_grid(kData + "/five_bus.csv");
  DemandProfile q("current", {"D1", "D2"}, {0});
  q.at(0, 0) = 370;  // T24 carries about 265 MW against 250
  q.at(1, 0) = 60;
  const auto cal = calibrate_ratings(five, q);
  const Dispatcher d(cal);
  const auto sol = dispatch_hour(d, q, 0, {}, 10.0);
  CHECK(sol.status == DispatchStatus::feasible);
  CHECK(sol.total_shed() == 0.0);
  const Dispatcher raw(five);
  CHECK(dispatch_hour(raw, q, 0, {}, 10.0).total_shed() > 0.0);

  p.at(0, 0) = 500.0;
  CHECK_THROWS_AS(calibrate_ratings(g, p), Unstable);
}
