#include <gtest/gtest.h>

#include <fstream>
#include <random>
#include <sstream>

#include <nlohmann/json.hpp>

#include <noiseflood/csv.hpp>
#include <noiseflood/detector.hpp>
#include <noiseflood/errors.hpp>
#include <noiseflood/manifest.hpp>
#include <noiseflood/score_csv.hpp>

#include "fixtures.hpp"

namespace nflood {
namespace {

using testing::TempDir;

std::vector<ScoreVector> random_vectors(std::uint64_t seed, std::size_t n) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> eps(1, 50);
  std::vector<ScoreVector> out;
  for (std::size_t i = 0; i < n; ++i) {
    ScoreVector v;
    v.id = "row" + std::to_string(i);
    v.path = "wav/row" + std::to_string(i) + ".wav";
    const bool adv = i % 2 == 0;
    for (auto& s : v.scores) {
      s.epsilon = 50 * (adv ? eps(rng) / 3 + 1 : eps(rng));
      s.flipped = s.epsilon < 2500;
      s.calls_used = static_cast<std::uint64_t>(s.epsilon / 50 + 1);
    }
    v.is_adversarial = adv;
    if (adv) {
      v.source = "low";
      v.target = i % 4 == 0 ? "high" : "lowmid";
    }
    out.push_back(v);
  }
  return out;
}

DetectorModel fitted(DetectorKind kind, const std::vector<ScoreVector>& train) {
  DetectorModel m;
  m.kind = kind;
  m.provenance.seed = 42;
  m.provenance.dataset_hash = "00ff";
  m.provenance.training_rows = train.size();
  m.provenance.run_config = R"({"k":1})";
  const auto examples = to_examples(train);
  switch (kind) {
    case DetectorKind::Threshold: {
      std::vector<LabeledScore> s;
      for (const auto& v : train) s.push_back({static_cast<double>(v.scores[2].epsilon), *v.is_adversarial});
      m.body = learn_threshold(s, 2);
      break;
    }
    case DetectorKind::Majority:
      m.body = VotingModel{learn_band_thresholds(train), 3};
      break;
    case DetectorKind::Ltv:
      m.body = learn_vote_threshold(train, learn_band_thresholds(train));
      break;
    case DetectorKind::Tree:
      m.body = fit_tree(examples);
      break;
    case DetectorKind::Forest: {
      ForestParams p;
      p.n_trees = 7;
      p.seed = 3;
      m.body = fit_forest(examples, p);
      break;
    }
    case DetectorKind::AdaBoost:
      m.body = fit_adaboost(examples, {8});
      break;
    case DetectorKind::GBoost:
      m.body = fit_gboost(examples, {15, 0.3, 2, 1});
      break;
  }
  return m;
}

const DetectorKind kAllKinds[] = {DetectorKind::Threshold, DetectorKind::Majority,
                                  DetectorKind::Ltv,       DetectorKind::Tree,
                                  DetectorKind::Forest,    DetectorKind::AdaBoost,
                                  DetectorKind::GBoost};

TEST(Model, RoundTripPreservesPredictions) {
  const auto train = random_vectors(1, 40);
  TempDir dir;
  for (auto kind : kAllKinds) {
    const auto model = fitted(kind, train);
    save_model(model, dir / "m.json");
    const auto back = load_model(dir / "m.json");
    EXPECT_EQ(back.kind, kind);
    EXPECT_EQ(back.provenance.seed, 42u);
    EXPECT_EQ(back.provenance.dataset_hash, "00ff");
    EXPECT_EQ(back.provenance.run_config, R"({"k":1})");
    EXPECT_EQ(back.provenance.plan, BandPlan{});
    for (const auto& v : train) {
      const auto a = model.predict(v);
      const auto b = back.predict(v);
      ASSERT_EQ(a.adversarial, b.adversarial) << to_string(kind);
      ASSERT_EQ(a.probability, b.probability) << to_string(kind);
    }
    EXPECT_EQ(serialize(back), serialize(model)) << to_string(kind);
  }
}

TEST(Model, IsVersionedJson) {
  const auto text = serialize(fitted(DetectorKind::Ltv, random_vectors(2, 20)));
  const auto j = nlohmann::json::parse(text);
  EXPECT_EQ(j.at("format"), "nflood-model");
  EXPECT_EQ(j.at("format_version"), kModelFormatVersion);
  EXPECT_EQ(j.at("kind"), "ltv");
}

TEST(Model, RejectsUnknownVersionAndGarbage) {
  auto j = nlohmann::json::parse(serialize(fitted(DetectorKind::Tree, random_vectors(3, 20))));
  j["format_version"] = 99;
  EXPECT_THROW(deserialize(j.dump()), DataError);
  EXPECT_THROW(deserialize("{not json"), DataError);
  EXPECT_THROW(deserialize(R"({"format":"other"})"), DataError);
  EXPECT_THROW(load_model("/nonexistent/model.json"), DataError);
}

TEST(Model, KindNames) {
  for (auto kind : kAllKinds) EXPECT_EQ(parse_detector_kind(to_string(kind)), kind);
  EXPECT_THROW(parse_detector_kind("svm"), ConfigError);
}

TEST(ScoreCsv, HeaderLayout) {
  ScoreTable table;
  std::ostringstream out;
  write_score_csv(table, out);
  EXPECT_EQ(out.str(),
            "id,path,is_adversarial,source,target,eps_unfiltered,eps_0_2000,eps_2000_4000,"
            "eps_4000_6000,eps_6000_8000,flipped_unfiltered,flipped_0_2000,flipped_2000_4000,"
            "flipped_4000_6000,flipped_6000_8000,seed,s,eps_max\n");
}

TEST(ScoreCsv, RoundTrip) {
  ScoreTable table;
  table.seed = 123456789012345ULL;
  table.step_size = 25;
  table.epsilon_max = 1000;
  table.provenance = R"({"command":"score"})";
  table.rows = random_vectors(4, 12);
  table.rows[1].is_adversarial.reset();
  table.rows[2].id = "needs,quoting";
  std::stringstream buf;
  write_score_csv(table, buf);
  const auto back = read_score_csv(buf);
  EXPECT_EQ(back.seed, table.seed);
  EXPECT_EQ(back.step_size, 25);
  EXPECT_EQ(back.epsilon_max, 1000);
  EXPECT_EQ(back.provenance, table.provenance);
  ASSERT_EQ(back.rows.size(), table.rows.size());
  for (std::size_t i = 0; i < table.rows.size(); ++i) {
    EXPECT_EQ(back.rows[i].id, table.rows[i].id);
    EXPECT_EQ(back.rows[i].path, table.rows[i].path);
    EXPECT_EQ(back.rows[i].is_adversarial, table.rows[i].is_adversarial);
    EXPECT_EQ(back.rows[i].source, table.rows[i].source);
    EXPECT_EQ(back.rows[i].target, table.rows[i].target);
    for (std::size_t b = 0; b < kNumBands; ++b) {
      EXPECT_EQ(back.rows[i].scores[b].epsilon, table.rows[i].scores[b].epsilon);
      EXPECT_EQ(back.rows[i].scores[b].flipped, table.rows[i].scores[b].flipped);
    }
  }
  std::stringstream again;
  write_score_csv(back, again);
  std::stringstream first;
  write_score_csv(table, first);
  EXPECT_EQ(again.str(), first.str());
}

TEST(ScoreCsv, CustomBandsChangeColumns) {
  ScoreTable table;
  table.plan = BandPlan::parse("0,1000,2000,3000,4000");
  table.rows = random_vectors(5, 2);
  std::stringstream buf;
  write_score_csv(table, buf);
  EXPECT_NE(buf.str().find("eps_3000_4000"), std::string::npos);
  EXPECT_EQ(read_score_csv(buf).plan, table.plan);
}

TEST(ScoreCsv, RejectsMalformedInput) {
  std::istringstream no_header("");
  EXPECT_THROW(read_score_csv(no_header), DataError);
  std::istringstream short_header("id,path\n");
  EXPECT_THROW(read_score_csv(short_header), DataError);

  ScoreTable table;
  table.rows = random_vectors(6, 2);
  std::stringstream buf;
  write_score_csv(table, buf);
  std::string text = buf.str();
  // Second row claims a different seed.
  const auto last = text.rfind(",0,50,2500");
  ASSERT_NE(last, std::string::npos);
  text.replace(last, 10, ",1,50,2500");
  std::istringstream mixed(text);
  EXPECT_THROW(read_score_csv(mixed), DataError);
}

TEST(Manifest, RoundTripAndRelativePaths) {
  TempDir dir;
  std::vector<ManifestRow> rows(2);
  rows[0].id = "a";
  rows[0].path = "sub/a.wav";
  rows[0].is_adversarial = true;
  rows[0].source = "yes";
  rows[0].target = "no";
  rows[1].id = "b";
  rows[1].path = "b.wav";
  rows[1].is_adversarial = false;
  save_manifest(rows, dir / "m.csv");
  const auto back = load_manifest(dir / "m.csv");
  ASSERT_EQ(back.size(), 2u);
  EXPECT_EQ(back[0].path, "sub/a.wav");
  EXPECT_EQ(back[0].resolved, dir.path() / "sub/a.wav");
  EXPECT_EQ(back[0].target, "no");
  EXPECT_FALSE(back[1].source);
}

TEST(Manifest, RejectsDuplicatesSameLabelsAndVersions) {
  TempDir dir;
  const auto write = [&](const std::string& text) {
    std::ofstream(dir / "m.csv") << text;
    return dir / "m.csv";
  };
  EXPECT_THROW(load_manifest(write("id,path,is_adversarial,source,target\na,x.wav,0,,\na,y.wav,0,,\n")),
               DataError);
  EXPECT_THROW(load_manifest(write("id,path,is_adversarial,source,target\na,x.wav,1,yes,yes\n")),
               DataError);
  EXPECT_THROW(load_manifest(write("# nflood-manifest v9\nid,path,is_adversarial,source,target\n")),
               DataError);
  EXPECT_THROW(load_manifest(write("id,path,is_adversarial,source,target\na,x.wav,maybe,,\n")),
               DataError);
  EXPECT_EQ(load_manifest(write("# nflood-manifest v1\nid,path,is_adversarial,source,target\n")).size(),
            0u);
}

TEST(Csv, QuotingRoundTrip) {
  const std::vector<std::string> fields{"plain", "with,comma", "with \"quote\"", " padded ", ""};
  const auto line = csv::join_record(fields);
  EXPECT_EQ(csv::split_record(line), fields);
  EXPECT_EQ(csv::escape("plain"), "plain");
  EXPECT_EQ(csv::escape("a,b"), "\"a,b\"");
}

TEST(Fingerprint, DependsOnBytes) {
  TempDir dir;
  std::ofstream(dir / "a") << "hello";
  std::ofstream(dir / "b") << "hellp";
  EXPECT_EQ(file_fingerprint(dir / "a"), file_fingerprint(dir / "a"));
  EXPECT_NE(file_fingerprint(dir / "a"), file_fingerprint(dir / "b"));
  EXPECT_EQ(file_fingerprint(dir / "a").size(), 16u);
}

}  // namespace
}  // namespace nflood
