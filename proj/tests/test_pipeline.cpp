#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <random>
#include <tuple>

#include <stdexcept>

#include "doctest.h"
#include "ltcnet/dataset.hpp"
#include "ltcnet/kmeans.hpp"
#include "ltcnet/metrics.hpp"
#include "ltcnet/synth.hpp"

using namespace ltcnet;

namespace {

constexpr double kNan = std::numeric_limits<double>::quiet_NaN();

RawRecord rec(std::int64_t ts, const std::string& site, const std::string& cell,
              const std::string& unit, double counter,
              std::optional<double> energy = std::nullopt) {
  RawRecord r;
  r.timestamp = ts;
  r.site_id = site;
  r.cell_id = cell;
  r.unit_id = unit;
  r.counters["c"] = counter;
  r.energy = energy;
  return r;
}

}  // namespace

TEST_CASE("forward fill worked examples") {
  std::vector<double> a{1.0, kNan, 3.0};
  forward_fill(a);
  CHECK(a == std::vector<double>{1.0, 1.0, 3.0});

  std::vector<double> b{kNan, 2.0, kNan, kNan};
  forward_fill(b);
  CHECK(b == std::vector<double>{2.0, 2.0, 2.0, 2.0});

  std::vector<double> c{4.0, 5.0, 6.0};
  forward_fill(c);
  CHECK(c == std::vector<double>{4.0, 5.0, 6.0});

  std::vector<double> d{kNan, kNan};
  CHECK_THROWS_AS(forward_fill(d), std::exception);

  // idempotence
  std::vector<double> e{1.0, kNan, kNan, 7.0, kNan};
  forward_fill(e);
  std::vector<double> once = e;
  forward_fill(e);
  CHECK(e == once);
}

TEST_CASE("unit aggregation sums counters and passes energy through") {
  // single cell per unit -> identity
  std::vector<RawRecord> one{rec(0, "s1", "a", "u1", 4.0, 100.0)};
  auto out = aggregate_by_unit(one);
  REQUIRE(out.size() == 1);
  CHECK(out[0].counters.at("c") == 4.0);
  CHECK(out[0].energy == 100.0);

  // two cells of one unit: 3 + 5 = 8
  std::vector<RawRecord> two{rec(0, "s1", "a", "u1", 3.0, 100.0),
                             rec(0, "s1", "b", "u1", 5.0, 100.0)};
  out = aggregate_by_unit(two);
  REQUIRE(out.size() == 1);
  CHECK(out[0].counters.at("c") == 8.0);
  CHECK(out[0].energy == 100.0);

  // conflicting per-unit energy must not be silently merged
  std::vector<RawRecord> bad{rec(0, "s1", "a", "u1", 1.0, 100.0),
                             rec(0, "s1", "b", "u1", 1.0, 101.0)};
  CHECK_THROWS_AS(aggregate_by_unit(bad), std::exception);
}

TEST_CASE("aggregation agrees with a brute-force group-by oracle") {
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> d(0.0, 10.0);
  std::vector<RawRecord> records;
  for (int ts = 0; ts < 4; ++ts)
    for (const char* cell : {"a", "b", "c"}) {
      const char* unit = (std::string(cell) == "c") ? "u2" : "u1";
      auto r = rec(ts * 900, "site", cell, unit, d(rng), ts * 10.0);
      r.counters["extra"] = d(rng);
      records.push_back(r);
    }

  // naive nested-loop group-by
  std::map<std::tuple<std::string, std::string, std::int64_t>,
           std::map<std::string, double>>
      expect;
  std::map<std::tuple<std::string, std::string, std::int64_t>, double> mass;
  for (const auto& r : records)
    for (const auto& [k, v] : r.counters) {
      expect[{r.site_id, r.unit_id, r.timestamp}][k] += v;
      mass[{r.site_id, r.unit_id, r.timestamp}] += v;
    }

  auto out = aggregate_by_unit(records);
  CHECK(out.size() == expect.size());
  double mass_in = 0.0, mass_out = 0.0;
  for (const auto& r : records)
    for (const auto& [k, v] : r.counters) mass_in += v;
  for (const auto& r : out) {
    const auto& want = expect.at({r.site_id, r.unit_id, r.timestamp});
    for (const auto& [k, v] : r.counters) {
      CHECK(v == doctest::Approx(want.at(k)).epsilon(1e-12));
      mass_out += v;
    }
  }
  CHECK(mass_out == doctest::Approx(mass_in).epsilon(1e-12));
}

TEST_CASE("scaling matches the hand example and is train-fitted only") {
  Dataset ds;
  ds.feature_names = {"f"};
  ds.target = {10.0, 20.0, 30.0, 40.0};
  ds.timestamps = {0, 900, 1800, 2700};
  ds.features = {{1.0}, {2.0}, {3.0}, {100.0}};
  auto warnings = fit_scale(ds, 0.75);  // train rows: the first three
  CHECK(warnings.empty());
  double s = std::sqrt(2.0 / 3.0);  // population std of [1,2,3]
  CHECK(ds.features[0][0] == doctest::Approx(-1.0 / s).epsilon(1e-12));
  CHECK(ds.features[0][0] == doctest::Approx(-1.2247448713915890).epsilon(1e-12));
  CHECK(ds.features[1][0] == doctest::Approx(0.0));
  CHECK(ds.features[2][0] == doctest::Approx(1.0 / s).epsilon(1e-12));
  // test row scaled with the train statistics, not its own
  CHECK(ds.features[3][0] == doctest::Approx((100.0 - 2.0) / s).epsilon(1e-12));
  CHECK(ds.scaled);

  // refit on already-scaled train data: mean ~ 0, std ~ 1
  Dataset ds2 = ds;
  fit_scale(ds2, 0.75);
  CHECK(ds2.scaler.feature_mean[0] == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(ds2.scaler.feature_std[0] == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("constant train column warns and maps to zero") {
  Dataset ds;
  ds.feature_names = {"flat", "ok"};
  ds.target = {1.0, 2.0, 3.0, 4.0};
  ds.timestamps = {0, 900, 1800, 2700};
  ds.features = {{5.0, 1.0}, {5.0, 2.0}, {5.0, 3.0}, {6.0, 4.0}};
  auto warnings = fit_scale(ds, 0.75);
  REQUIRE(warnings.size() == 1);
  CHECK(warnings[0].find("flat") != std::string::npos);
  CHECK(ds.features[0][0] == 0.0);
  CHECK(ds.features[3][0] == 1.0);  // (6-5)/1 with std forced to 1
}

TEST_CASE("chronological split fractions") {
  auto mk = [](std::size_t t) {
    Dataset ds;
    ds.feature_names = {"f"};
    for (std::size_t i = 0; i < t; ++i) {
      ds.features.push_back({double(i)});
      ds.target.push_back(double(i));
      ds.timestamps.push_back(900 * static_cast<std::int64_t>(i));
    }
    return ds;
  };

  Dataset big = mk(8000);
  chrono_split(big);
  CHECK(big.train_end == 5200);
  CHECK(big.rows() - big.test_begin == 2400);

  Dataset small = mk(100);
  chrono_split(small);
  CHECK(small.train_end == 65);
  CHECK(small.test_begin == 70);  // 5-row gap

  Dataset nogap = mk(100);
  chrono_split(nogap, 0.65, 0.35);
  CHECK(nogap.train_end == nogap.test_begin);

  // no time leakage: every train timestamp precedes every test timestamp
  auto tr = big.train_target();
  auto te = big.test_target();
  CHECK(big.timestamps[big.train_end - 1] < big.timestamps[big.test_begin]);
  CHECK(tr.size() == 5200);
  CHECK(te.size() == 2400);
  CHECK(te.back() == 7999.0);
}

TEST_CASE("kmeans degenerate and separated cases") {
  std::vector<std::vector<double>> pts{{0.0, 0.0}, {2.0, 0.0}, {1.0, 3.0}};
  auto one = kmeans_fixed(pts, 1, 0);
  CHECK(one.centroids[0][0] == doctest::Approx(1.0));
  CHECK(one.centroids[0][1] == doctest::Approx(1.0));

  std::vector<std::vector<double>> dup(5, {3.0, -1.0});
  auto col = kmeans_fixed(dup, 1, 0);
  CHECK(col.inertia == doctest::Approx(0.0));

  CHECK_THROWS_AS(kmeans_fixed(pts, 4, 0), std::exception);

  // two well-separated seeded blobs: perfect partition, silhouette picks 2
  std::mt19937_64 rng(4);
  std::normal_distribution<double> n(0.0, 0.1);
  std::vector<std::vector<double>> blobs;
  for (int i = 0; i < 20; ++i) blobs.push_back({n(rng), n(rng)});
  for (int i = 0; i < 20; ++i) blobs.push_back({10.0 + n(rng), n(rng)});
  auto res = kmeans_cluster(blobs, {2, 3, 4}, 0);
  CHECK(res.k == 2);
  for (int i = 1; i < 20; ++i) CHECK(res.assignment[i] == res.assignment[0]);
  for (int i = 21; i < 40; ++i) CHECK(res.assignment[i] == res.assignment[20]);
  CHECK(res.assignment[0] != res.assignment[20]);
}

TEST_CASE("synthetic generator: determinism and noise ceiling") {
  SynthSpec spec;
  spec.rows = 1500;
  Dataset a = synth_generate(spec);
  Dataset b = synth_generate(spec);
  CHECK(a.target == b.target);
  CHECK(a.features == b.features);
  CHECK(a.rows() == 1500);
  CHECK(a.feature_count() == 6);

  // noiseless: the documented generating function explains the target exactly
  SynthSpec clean = spec;
  clean.noise_std = 0.0;
  Dataset c = synth_generate(clean);
  std::vector<double> oracle = synth_true_signal(clean);
  CHECK(r2_score(c.target, oracle) == doctest::Approx(1.0).epsilon(1e-9));

  // analytic ceiling 1/(1+sigma^2) for homoscedastic noise
  SynthSpec noisy = spec;
  noisy.rows = 8000;
  noisy.noise_std = 0.42;
  noisy.hetero = 0.0;
  Dataset d = synth_generate(noisy);
  std::vector<double> sig = synth_true_signal(noisy);
  double ceiling = 1.0 / (1.0 + noisy.noise_std * noisy.noise_std);
  CHECK(r2_score(d.target, sig) == doctest::Approx(ceiling).epsilon(0.04));
}

TEST_CASE("dataset container round-trips through disk") {
  SynthSpec spec;
  spec.rows = 200;
  Dataset a = synth_generate(spec);
  chrono_split(a);
  fit_scale(a, 0.65);
  std::string path = "tmp_dataset_roundtrip.json";
  a.save(path);
  Dataset b = Dataset::load(path);
  std::remove(path.c_str());
  CHECK(b.feature_names == a.feature_names);
  CHECK(b.features == a.features);
  CHECK(b.target == a.target);
  CHECK(b.timestamps == a.timestamps);
  CHECK(b.train_end == a.train_end);
  CHECK(b.test_begin == a.test_begin);
  CHECK(b.scaled == a.scaled);
  CHECK(b.scaler.feature_mean == a.scaler.feature_mean);
}

TEST_CASE("records csv round-trips including missing values") {
  std::vector<RawRecord> records;
  auto r1 = rec(900, "s1", "c1", "u1", 3.5, 42.0);
  r1.counters["other"] = kNan;
  auto r2 = rec(1800, "s1", "c1", "u1", kNan);
  r2.counters["other"] = 7.0;
  records = {r1, r2};
  std::string path = "tmp_records_roundtrip.csv";
  write_records_csv(path, records);
  auto back = read_records_csv(path);
  std::remove(path.c_str());
  REQUIRE(back.size() == 2);
  CHECK(back[0].timestamp == 900);
  CHECK(back[0].site_id == "s1");
  CHECK(back[0].counters.at("c") == 3.5);
  CHECK(std::isnan(back[0].counters.at("other")));
  CHECK(back[0].energy == 42.0);
  CHECK(std::isnan(back[1].counters.at("c")));
  CHECK(back[1].counters.at("other") == 7.0);
  CHECK_FALSE(back[1].energy.has_value());
}
