// Acceptance run: one PASS/FAIL line per criterion. Every tolerance, seed and
// sample count is pinned below.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <numbers>
#include <random>
#include <sstream>

#include "ctxfab/location_middleware.hpp"
#include "ctxfab/routing.hpp"
#include "ctxfab/service.hpp"
#include "ctxfab/spatial_ops.hpp"
#include "ctxfab/trigger_engine.hpp"
#include "oracles.hpp"
#include "support.hpp"

using namespace ctxfab;

namespace {

constexpr std::uint64_t kSeed = 20260415;

struct Outcome {
  bool pass;
  std::string detail;
  // Set when the failure is fully accounted for by a limit of the reference
  // itself; the line still prints FAIL but does not fail the run.
  bool oracle_limited = false;
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

// 1 -------------------------------------------------------------------------
Outcome fusion_algebra() {
  constexpr int kInputs = 10'000;
  constexpr double kTimeLimitS = 5.0;
  auto t0 = std::chrono::steady_clock::now();
  std::mt19937_64 rng(kSeed);
  std::uniform_real_distribution<double> pos(-500, 500), sig(0.05, 200), prob(0.01, 1.0);
  std::uniform_int_distribution<int> age(0, 30'000), count(1, 5);
  const Technology techs[] = {Technology::GPS, Technology::GSM, Technology::WLAN, Technology::RFID, Technology::OTHER};
  FusionParams params;
  int violations = 0;
  for (int i = 0; i < kInputs; ++i) {
    std::vector<LocalFix> in;
    int n = count(rng);
    for (int k = 0; k < n; ++k) {
      double sx = sig(rng), sy = sig(rng);
      in.push_back({DeviceId("d" + std::to_string(k)), techs[k], 30'000 - age(rng), {pos(rng), pos(rng)}, sx, sy,
                    prob(rng)});
    }
    auto f = fuse_fixes(UserId("u"), 30'000, in, params);
    if (!f) {
      ++violations;
      continue;
    }
    double min_sx = INFINITY, min_sy = INFINITY, lo_x = INFINITY, hi_x = -INFINITY, lo_y = INFINITY, hi_y = -INFINITY;
    for (const auto& x : in) {
      double a = (30'000 - x.timestamp) / 1000.0 * params.drift_mps;
      min_sx = std::min(min_sx, std::sqrt(x.sigma_x * x.sigma_x + a * a));
      min_sy = std::min(min_sy, std::sqrt(x.sigma_y * x.sigma_y + a * a));
      lo_x = std::min(lo_x, x.pos.x), hi_x = std::max(hi_x, x.pos.x);
      lo_y = std::min(lo_y, x.pos.y), hi_y = std::max(hi_y, x.pos.y);
    }
    bool ok = f->sigma_x <= min_sx && f->sigma_y <= min_sy && f->x >= lo_x && f->x <= hi_x && f->y >= lo_y &&
              f->y <= hi_y;
    violations += !ok;
  }
  double s = seconds_since(t0);
  return {violations == 0 && s < kTimeLimitS, fmt("%d inputs, %d violations, %.2f s", kInputs, violations, s)};
}

// 2 -------------------------------------------------------------------------
Outcome fusion_benefit() {
  constexpr int kSteps = 1000;
  constexpr double kGpsSigma = 5.0, kWlanSigma = 3.0, kFactor = 1.05;
  std::mt19937_64 rng(kSeed + 2);
  std::normal_distribution<double> gps(0, kGpsSigma), wlan(0, kWlanSigma);
  UserRegistry users;
  users.add(UserId("u"));
  LocationMiddleware mw(users);
  mw.set_frame(test::lab_frame());
  mw.register_device(test::device("g", "u", Technology::GPS));
  mw.register_device(test::device("w", "u", Technology::WLAN));
  double se_f = 0, se_g = 0, se_w = 0;
  for (int i = 0; i < kSteps; ++i) {
    Timestamp t = 1000LL * i;
    double th = i * 0.01;
    Vec2 truth{200 * std::cos(th) + 0.5 * i, 120 * std::sin(2 * th)};
    Vec2 g{truth.x + gps(rng), truth.y + gps(rng)};
    Vec2 w{truth.x + wlan(rng), truth.y + wlan(rng)};
    mw.ingest_fix(test::local_fix("u", "g", Technology::GPS, t, g.x, g.y, kGpsSigma, 0.9));
    mw.ingest_fix(test::local_fix("u", "w", Technology::WLAN, t, w.x, w.y, kWlanSigma, 0.9));
    auto f = mw.fuse(UserId("u"), t);
    se_f += std::pow(dist(f.pos(), truth), 2);
    se_g += std::pow(dist(g, truth), 2);
    se_w += std::pow(dist(w, truth), 2);
  }
  double rf = std::sqrt(se_f / kSteps), rg = std::sqrt(se_g / kSteps), rw = std::sqrt(se_w / kSteps);
  double best = std::min(rg, rw);
  return {rf <= kFactor * best, fmt("fused RMSE %.3f m, GPS %.3f m, WLAN %.3f m, bound %.3f m", rf, rg, rw, kFactor * best)};
}

// 3 -------------------------------------------------------------------------
Outcome handover() {
  constexpr Timestamp kGapStart = 30'000, kGapEnd = 50'000, kStep = 100;
  UserRegistry users;
  users.add(UserId("u"));
  LocationMiddleware mw(users);
  mw.set_frame(test::lab_frame());
  mw.register_device(test::device("g", "u", Technology::GPS));
  mw.register_device(test::device("m", "u", Technology::GSM));
  std::mt19937_64 rng(kSeed + 3);
  std::normal_distribution<double> noise(0, 1);
  int no_fix = 0, decreases = 0;
  double prev = -1;
  for (Timestamp t = 0; t <= kGapEnd + 5000; t += kStep) {
    double x = t / 100.0;  // 10 m/s
    bool gps_now = t % 1000 == 0 && (t <= kGapStart || t >= kGapEnd);
    if (gps_now) mw.ingest_fix(test::local_fix("u", "g", Technology::GPS, t, x + 5 * noise(rng), 5 * noise(rng), 5));
    if (t % 2000 == 0) mw.ingest_fix(test::local_fix("u", "m", Technology::GSM, t, x + 100 * noise(rng), 0, 100));
    if (t > kGapStart && t < kGapEnd) {
      auto f = mw.try_fuse(UserId("u"), t);
      if (!f) {
        ++no_fix;
        continue;
      }
      if (f->sigma_x < prev) ++decreases;
      prev = f->sigma_x;
    }
  }
  return {no_fix == 0 && decreases == 0,
          fmt("20 s GPS gap at %.1f ms steps: %d NoRecentFix, %d sigma decreases", double(kStep), no_fix, decreases)};
}

// 4 -------------------------------------------------------------------------
std::vector<Vec2> random_star_polygon(std::mt19937_64& rng, Vec2 centre, double r_min, double r_max, int n) {
  std::uniform_real_distribution<double> ang(0, 2 * std::numbers::pi), rad(r_min, r_max);
  std::vector<double> a(n);
  for (auto& x : a) x = ang(rng);
  std::sort(a.begin(), a.end());
  std::vector<Vec2> ring;
  for (double x : a) {
    double r = rad(rng);
    ring.push_back({centre.x + r * std::cos(x), centre.y + r * std::sin(x)});
  }
  return ring;
}

// Longest run of the open segment a-b through any polygon interior, from the
// exact edge crossings.
double longest_interior_chord(oracle::P a, oracle::P b, const std::vector<std::vector<oracle::P>>& rings) {
  double best = 0;
  for (const auto& ring : rings) {
    std::vector<double> ts{0.0, 1.0};
    for (std::size_t i = 0; i < ring.size(); ++i) {
      oracle::P c = ring[i], d = ring[(i + 1) % ring.size()];
      double den = (b.x - a.x) * (d.y - c.y) - (b.y - a.y) * (d.x - c.x);
      if (den == 0) continue;
      double t = ((c.x - a.x) * (d.y - c.y) - (c.y - a.y) * (d.x - c.x)) / den;
      double u = ((c.x - a.x) * (b.y - a.y) - (c.y - a.y) * (b.x - a.x)) / den;
      if (t > 0 && t < 1 && u >= 0 && u <= 1) ts.push_back(t);
    }
    std::sort(ts.begin(), ts.end());
    double len = std::hypot(b.x - a.x, b.y - a.y);
    for (std::size_t i = 0; i + 1 < ts.size(); ++i) {
      double m = (ts[i] + ts[i + 1]) / 2;
      if (oracle::inside({a.x + m * (b.x - a.x), a.y + m * (b.y - a.y)}, ring))
        best = std::max(best, (ts[i + 1] - ts[i]) * len);
    }
  }
  return best;
}

Outcome visibility_oracle() {
  constexpr int kScenes = 500, kSegmentsPerScene = 20, kSamples = 10'000;
  constexpr double kClearance = 1e-6, kTimeLimitS = 60.0;
  auto t0 = std::chrono::steady_clock::now();
  std::mt19937_64 rng(kSeed + 4);
  std::uniform_int_distribution<int> n_poly(1, 10), n_vert(3, 10);
  std::uniform_real_distribution<double> coord(0, 100);
  int compared = 0, skipped = 0, disagreements = 0, oracle_misses = 0;
  std::string notes;
  for (int s = 0; s < kScenes; ++s) {
    std::vector<Feature> features;
    std::vector<std::vector<oracle::P>> rings;
    int np = n_poly(rng);
    for (int k = 0; k < np; ++k) {
      auto ring = random_star_polygon(rng, {coord(rng), coord(rng)}, 2, 15, n_vert(rng));
      Feature f = test::polygon("p" + std::to_string(k), ring);
      if (!geometry_problem(f.geometry).empty()) continue;
      std::vector<oracle::P> pr;
      for (auto v : ring) pr.push_back({v.x, v.y});
      rings.push_back(pr);
      features.push_back(std::move(f));
    }
    SpatialModel m = test::model_of(std::move(features));
    for (int q = 0; q < kSegmentsPerScene; ++q) {
      oracle::P a{coord(rng), coord(rng)}, b{coord(rng), coord(rng)};
      double clearance = INFINITY;
      for (const auto& ring : rings) {
        clearance = std::min({clearance, oracle::boundary_dist(a, ring), oracle::boundary_dist(b, ring)});
        for (const auto& v : ring) clearance = std::min(clearance, oracle::seg_dist(v, a, b));
      }
      if (clearance <= kClearance) {
        ++skipped;
        continue;
      }
      ++compared;
      bool lib = visibility({a.x, a.y}, {b.x, b.y}, m).visible;
      bool ref = oracle::visible_by_sampling(a, b, rings, kSamples);
      if (lib != ref) {
        ++disagreements;
        double chord = longest_interior_chord(a, b, rings);
        double spacing = std::hypot(b.x - a.x, b.y - a.y) / (kSamples + 1);
        // A blocked verdict whose only interior run is shorter than the sample
        // spacing is invisible to the sampling oracle.
        if (!lib && chord > 0 && chord < spacing) ++oracle_misses;
        notes += fmt("; scene %d lib=%s oracle=%s interior chord %.2e m vs spacing %.2e m", s,
                     lib ? "visible" : "blocked", ref ? "visible" : "blocked", chord, spacing);
      }
    }
  }
  double secs = seconds_since(t0);
  bool limited = disagreements > 0 && disagreements == oracle_misses && secs < kTimeLimitS;
  return {disagreements == 0 && secs < kTimeLimitS,
          fmt("%d segments compared, %d below clearance, %d disagreements (%d sub-spacing oracle misses), %.1f s",
              compared, skipped, disagreements, oracle_misses, secs) +
              notes,
          limited};
}

// 5 -------------------------------------------------------------------------
Outcome routing() {
  constexpr int kGraphs = 200;
  std::mt19937_64 rng(kSeed + 5);
  std::uniform_int_distribution<int> n_nodes(2, 8);
  std::uniform_real_distribution<double> coord(0, 100), stretch(1.0, 1.6);
  std::bernoulli_distribution has_edge(0.45), stairs(0.3), wheel(0.5);
  int mismatches = 0, stairs_used = 0, routed = 0;
  for (int g = 0; g < kGraphs; ++g) {
    int n = n_nodes(rng);
    NavGraph graph;
    for (int i = 0; i < n; ++i) graph.nodes.push_back({NodeId("n" + std::to_string(i)), {coord(rng), coord(rng)}, ""});
    std::vector<oracle::Edge> oedges;
    DisabilityProfile profile;
    if (wheel(rng)) profile.insert(tags::kWheelchair);
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j) {
        if (!has_edge(rng)) continue;
        double len = dist(graph.nodes[i].pos, graph.nodes[j].pos) * stretch(rng);
        bool is_stairs = stairs(rng);
        graph.edges.push_back(test::edge("n" + std::to_string(i), "n" + std::to_string(j), len,
                                         is_stairs ? std::set<std::string>{"stairs"} : std::set<std::string>{}));
        oedges.push_back({i, j, len, is_stairs && profile.contains(tags::kWheelchair)});
      }
    SpatialModel m = test::model_of({}, graph);
    auto best = oracle::shortest_by_enumeration(n, oedges, 0, n - 1);
    try {
      Route r = plan_route(m, graph.nodes[0].pos, graph.nodes[n - 1].pos, profile, default_disqualifications(), 1e-6);
      ++routed;
      if (!best || std::abs(r.length - *best) > 1e-9 * std::max(1.0, *best)) ++mismatches;
      if (profile.contains(tags::kWheelchair))
        for (const auto& t : r.step_tags) stairs_used += t.contains("stairs");
    } catch (const Error& e) {
      if (e.code() != ErrorCode::NoAccessibleRoute || best) ++mismatches;
    }
  }
  return {mismatches == 0 && stairs_used == 0,
          fmt("%d graphs (%d routable): %d optimality mismatches, %d stairs edges on wheelchair routes", kGraphs, routed,
              mismatches, stairs_used)};
}

// 6 -------------------------------------------------------------------------
Outcome triggers() {
  constexpr int kSequences = 1000, kLength = 60;
  std::mt19937_64 rng(kSeed + 6);
  std::uniform_real_distribution<double> thr(0.5, 30), d(0, 60), band(0, 5);
  std::bernoulli_distribution explicit_band(0.5), walk(0.5);
  int mismatches = 0, bad_distance = 0, events = 0;
  SpatialModel empty;
  for (int s = 0; s < kSequences; ++s) {
    double threshold = thr(rng);
    TriggerRule rule;
    rule.id = RuleId("r");
    rule.user = UserId("u");
    rule.target = Target::point({0, 0});
    rule.threshold_m = threshold;
    if (explicit_band(rng)) rule.hysteresis_m = band(rng);
    // Half the sequences random-walk around the threshold to exercise the band.
    std::vector<double> seq(kLength);
    bool near = walk(rng);
    std::normal_distribution<double> step(0, 1.5);
    double x = threshold;
    for (auto& v : seq) v = near ? (x = std::max(0.0, x + step(rng))) : d(rng);
    TriggerEngine engine;
    engine.add_rule(rule, empty);
    std::vector<Timestamp> got;
    for (int i = 0; i < kLength; ++i) {
      FusedPosition f;
      f.user = rule.user;
      f.timestamp = i;
      f.x = seq[i];
      for (const auto& e : engine.evaluate(rule.user, f, empty)) {
        got.push_back(e.timestamp);
        bad_distance += !(e.distance_m < threshold);
      }
    }
    auto expect = oracle::hysteresis_events(seq, threshold, rule.hysteresis());
    std::vector<Timestamp> want(expect.begin(), expect.end());
    mismatches += got != want;
    events += static_cast<int>(got.size());
  }
  return {mismatches == 0 && bad_distance == 0,
          fmt("%d sequences, %d events, %d count/time mismatches, %d events at d >= threshold", kSequences, events,
              mismatches, bad_distance)};
}

// 7 -------------------------------------------------------------------------
Outcome recommender() {
  constexpr int kInstances = 3000;
  constexpr double kTol = 1e-12;
  std::mt19937_64 rng(kSeed + 7);
  std::uniform_int_distribution<int> n_users(1, 5), n_items(1, 10), rating(0, 5), n_tags(1, 3), tag(0, 5);
  std::bernoulli_distribution visit(0.4), has_prefs(0.5);
  std::uniform_real_distribution<double> weight(0, 1);
  int score_mismatch = 0, order_mismatch = 0;
  for (int inst = 0; inst < kInstances; ++inst) {
    int nu = n_users(rng), ni = n_items(rng);
    std::vector<Item> items;
    std::map<std::string, std::set<std::string>> oitems;
    for (int i = 0; i < ni; ++i) {
      std::set<std::string> tags;
      for (int k = n_tags(rng); k > 0; --k) tags.insert("t" + std::to_string(tag(rng)));
      items.push_back({ItemId("i" + std::to_string(i)), "", tags});
      oitems["i" + std::to_string(i)] = tags;
    }
    VisitMatrix vm;
    std::map<std::string, std::map<std::string, double>> ov;
    for (int u = 0; u < nu; ++u)
      for (int i = 0; i < ni; ++i)
        if (visit(rng)) {
          int r = rating(rng);
          double w = r == 0 ? 1.0 : r / 5.0;
          vm[UserId("u" + std::to_string(u))][ItemId("i" + std::to_string(i))] = w;
          ov["u" + std::to_string(u)]["i" + std::to_string(i)] = w;
        }
    PreferenceProfile prefs;
    if (has_prefs(rng))
      for (int k = 0; k < 2; ++k) prefs["t" + std::to_string(tag(rng))] = weight(rng);
    std::map<std::string, double> oprefs(prefs.begin(), prefs.end());
    for (int u = 0; u < nu; ++u) {
      std::string user = "u" + std::to_string(u);
      auto lib = recommend(vm, prefs, Catalogue(items), UserId(user), ni);
      auto ref = oracle::recommend(ov, oprefs, oitems, user, ni, 0.7);
      if (lib.size() != ref.size()) {
        ++order_mismatch;
        continue;
      }
      for (std::size_t k = 0; k < lib.size(); ++k) {
        order_mismatch += lib[k].item.str() != ref[k].item;
        score_mismatch += std::abs(lib[k].score - ref[k].score) > kTol;
      }
    }
  }
  return {score_mismatch == 0 && order_mismatch == 0,
          fmt("%d instances: %d score mismatches (> %.0e), %d ordering mismatches", kInstances, score_mismatch, kTol,
              order_mismatch)};
}

// 8 -------------------------------------------------------------------------
Outcome transforms() {
  constexpr int kPoints = 10'000;
  constexpr double kRoundTripM = 1e-6, kDegreeM = 111'194.93, kDegreeTolM = 0.01;
  std::mt19937_64 rng(kSeed + 8);
  std::uniform_real_distribution<double> rot(-std::numbers::pi, std::numbers::pi), r(0, 10'000),
      a(0, 2 * std::numbers::pi), lat(-80, 80), lon(-179, 179);
  double worst = 0;
  for (int i = 0; i < kPoints; ++i) {
    auto f = make_frame("f", lon(rng), lat(rng), rot(rng));
    double rr = r(rng), aa = a(rng);
    // a global point within 10 km of the origin, round-tripped through the frame
    LonLat p = to_global({rr * std::cos(aa), rr * std::sin(aa)}, f);
    LonLat back = to_global(to_local(p, f), f);
    double dn = (back.lat - p.lat) * std::numbers::pi / 180 * kEarthRadiusM;
    double de = (back.lon - p.lon) * std::numbers::pi / 180 * kEarthRadiusM * std::cos(p.lat * std::numbers::pi / 180);
    worst = std::max(worst, std::hypot(dn, de));
  }
  auto frame = make_frame("f", 11.0, 48.0, 0.0);
  double one_degree = to_local({11.0, 49.0}, frame).y;
  bool ok = worst < kRoundTripM && std::abs(one_degree - kDegreeM) <= kDegreeTolM;
  return {ok, fmt("worst round trip %.3e m over %d points; 1 deg latitude = %.4f m", worst, kPoints, one_degree)};
}

// 9 -------------------------------------------------------------------------
Outcome schema_enforcement() {
  Framework fw;
  fw.set_model(test::model_of({}));
  fw.register_user(UserId("u"));
  fw.register_user(UserId("v"));
  fw.register_device(test::device("du", "u", Technology::WLAN));
  fw.register_device(test::device("dv", "v", Technology::WLAN));

  struct Case {
    std::function<void()> run;
    std::optional<ErrorCode> expect;
  };
  std::vector<Case> cases;
  const ErrorCode kinds[] = {ErrorCode::SchemaMismatch, ErrorCode::MissingTimestamp, ErrorCode::BadCoordinates,
                             ErrorCode::BadCoordinates, ErrorCode::DeviceOwnerMismatch};
  for (int i = 0; i < 50; ++i) {
    int kind = i % 5;
    bool as_fact = (i / 5) % 2 == 0 && kind < 2;  // Z and timestamp cases alternate between facts and fixes
    double x = 1 + i, y = 2 + i;
    auto good_fix = test::local_fix("u", "du", Technology::WLAN, 1000 + i, x, y, 1.0 + i % 3, 0.5);
    auto good_fact = test::fact("u", "location", 1000 + i,
                                {{"sys", "lab"}, {"x", x}, {"y", y}, {"px", 1.0}, {"py", 1.0}, {"p", 0.5}});
    auto bad_fix = good_fix;
    auto bad_fact = good_fact;
    std::optional<ErrorCode> expect = kinds[kind];
    switch (kind) {
      case 0:
        bad_fix.coords.z = 1.0 * i;
        bad_fact.value["z"] = 1.0 * i;
        if (!as_fact) expect = ErrorCode::BadCoordinates;
        break;
      case 1:
        bad_fix.timestamp.reset();
        bad_fact.timestamp.reset();
        break;
      case 2:
        (i % 2 ? bad_fix.coords.precision_x : bad_fix.coords.precision_y) = i % 4 ? 0.0 : -1.0;
        break;
      case 3:
        bad_fix.coords.probability = i % 2 ? 0.0 : 1.0 + 1e-9 * (i + 1);
        break;
      case 4:
        bad_fix.device = DeviceId("dv");
        break;
    }
    if (as_fact) {
      cases.push_back({[&fw, bad_fact] { fw.put_fact(bad_fact); }, expect});
      cases.push_back({[&fw, good_fact] { fw.put_fact(good_fact); }, std::nullopt});
    } else {
      cases.push_back({[&fw, bad_fix] { fw.ingest_fix(bad_fix); }, expect});
      cases.push_back({[&fw, good_fix] { fw.ingest_fix(good_fix); }, std::nullopt});
    }
  }
  int bad_ok = 0, bad_total = 0, good_ok = 0, good_total = 0;
  for (const auto& c : cases) {
    std::optional<ErrorCode> got;
    try {
      c.run();
    } catch (const Error& e) {
      got = e.code();
    }
    if (c.expect) {
      ++bad_total;
      bad_ok += got == c.expect;
    } else {
      ++good_total;
      good_ok += !got;
    }
  }
  return {bad_ok == bad_total && good_ok == good_total && bad_total == 50 && good_total == 50,
          fmt("%d/%d malformed rejected with the right code, %d/%d valid accepted", bad_ok, bad_total, good_ok,
              good_total)};
}

// 10 ------------------------------------------------------------------------
Outcome museum() {
  const std::string scenario = test::data_dir() + "/museum/scenario.json";
  std::string run1 = event_log_text(run_scenario(scenario));
  std::string run2 = event_log_text(run_scenario(scenario));
  std::ifstream in(test::golden_dir() + "/museum_events.jsonl", std::ios::binary);
  std::string golden((std::istreambuf_iterator<char>(in)), {});

  // Hand-worked expectations for the scripted visit.
  int lectern_events = 0;
  Timestamp fired_at = -1;
  std::vector<std::string> route_nodes, instructions, top3;
  std::vector<double> scores;
  std::istringstream lines(run1);
  for (std::string line; std::getline(lines, line);) {
    auto e = nlohmann::json::parse(line);
    if (e["kind"] == "trigger" && e["rule_id"] == "lectern_near") {
      ++lectern_events;
      fired_at = e["timestamp"];
    }
    if (e["kind"] == "query" && e["query"] == "route") {
      for (const auto& n : e["result"]["nodes"]) route_nodes.push_back(n);
      for (const auto& s : e["result"]["instructions"]) instructions.push_back(s);
    }
    if (e["kind"] == "query" && e["query"] == "recommend")
      for (const auto& r : e["result"]) top3.push_back(r["item"]), scores.push_back(r["score"]);
  }
  // Visitor reaches x = 31 (1 m from the lectern edge at x = 32) at t = 8000
  // and only wobbles inside the 3 m re-arm line afterwards.
  bool trigger_ok = lectern_events == 1 && fired_at == 8000;
  bool route_ok = route_nodes == std::vector<std::string>{"lect", "elev_b", "elev_t", "gal", "kids"} &&
                  instructions == std::vector<std::string>{"turn left", "enter the elevator and turn left",
                                                           "continue straight", "you have arrived"};
  // robot: 0.7 * (2/3) / (2/3 + 4/15) + 0.3 * (1/3) = 0.6
  // mummy: 0.7 * (4/15) / (14/15) + 0.3 * (0.5/2) = 0.275 ; vase: 0.3 * 0.25 = 0.075
  bool rec_ok = top3 == std::vector<std::string>{"robot", "mummy", "vase"} && scores.size() == 3 &&
                std::abs(scores[0] - 0.6) < 1e-12 && std::abs(scores[1] - 0.275) < 1e-12 &&
                std::abs(scores[2] - 0.075) < 1e-12;
  bool bytes_ok = run1 == run2 && run1 == golden;
  return {trigger_ok && route_ok && rec_ok && bytes_ok,
          fmt("trigger %s, elevator route %s, top-3 %s, byte-identical to golden across runs %s",
              trigger_ok ? "once at 8000 ms" : "WRONG", route_ok ? "ok" : "WRONG", rec_ok ? "ok" : "WRONG",
              bytes_ok ? "yes" : "NO")};
}

}  // namespace

int main() {
  struct Criterion {
    const char* name;
    Outcome (*run)();
  };
  const Criterion criteria[] = {
      {"1 fusion algebra", fusion_algebra},       {"2 fusion benefit", fusion_benefit},
      {"3 handover continuity", handover},        {"4 visibility oracle", visibility_oracle},
      {"5 routing optimality", routing},          {"6 trigger semantics", triggers},
      {"7 recommender equivalence", recommender}, {"8 transforms", transforms},
      {"9 schema enforcement", schema_enforcement}, {"10 museum scenario", museum},
  };
  int failed = 0, limited = 0;
  for (const auto& c : criteria) {
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failed += !o.pass && !o.oracle_limited;
    limited += !o.pass && o.oracle_limited;
    std::printf("%s  %-28s %s%s\n", o.pass ? "PASS" : "FAIL", c.name, o.detail.c_str(),
                !o.pass && o.oracle_limited ? " [reference resolution limit]" : "");
    std::fflush(stdout);
  }
  std::printf("%d failed, %d failed only at the reference's resolution limit\n", failed, limited);
  return failed == 0 ? 0 : 1;
}
