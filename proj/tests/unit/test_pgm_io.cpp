#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include <json.hpp>

#include "adamlab/io.hpp"
#include "adamlab/pgm.hpp"

using namespace adamlab;

TEST(Pgm, ConstantMatrixMapsToZero) {
  const std::string out = emit_pgm({1, 1, {5.0}});
  EXPECT_EQ(out, std::string("P5\n1 1\n255\n") + '\0');
}

TEST(Pgm, Endpoints) {
  const std::string out = emit_pgm({2, 1, {0.0, 1.0}});
  EXPECT_EQ(out, std::string("P5\n2 1\n255\n") + '\0' + '\xff');
}

TEST(Pgm, IdentityMaskGolden) {
  const std::string out = emit_pgm({2, 2, {1.0, 0.0, 0.0, 1.0}});
  const unsigned char golden[] = {'P', '5', '\n', '2', ' ', '2', '\n', '2', '5', '5',
                                  '\n', 0xff, 0x00, 0x00, 0xff};
  ASSERT_EQ(out.size(), sizeof golden);
  for (std::size_t k = 0; k < out.size(); ++k) {
    EXPECT_EQ(static_cast<unsigned char>(out[k]), golden[k]) << k;
  }
}

TEST(Pgm, RoundingAndExplicitRange) {
  const std::string out = emit_pgm({3, 1, {0.0, 0.5, 2.0}}, {0.0, 1.0});
  const std::string payload = out.substr(out.size() - 3);
  EXPECT_EQ(static_cast<unsigned char>(payload[0]), 0);
  EXPECT_EQ(static_cast<unsigned char>(payload[1]), 128);  // round(127.5)
  EXPECT_EQ(static_cast<unsigned char>(payload[2]), 255);  // clamped
}

TEST(Pgm, PayloadLengthIsWidthTimesHeight) {
  for (std::size_t w : {1u, 3u, 17u}) {
    for (std::size_t h : {1u, 4u, 9u}) {
      ScalarGrid g{w, h, std::vector<double>(w * h)};
      for (std::size_t k = 0; k < g.values.size(); ++k) g.values[k] = std::sin(double(k));
      const std::string out = emit_pgm(g, {}, "note");
      const std::string header = "P5\n# note\n" + std::to_string(w) + " " + std::to_string(h) +
                                 "\n255\n";
      ASSERT_EQ(out.rfind(header, 0), 0u);
      EXPECT_EQ(out.size() - header.size(), w * h);
    }
  }
}

TEST(Pgm, Errors) {
  EXPECT_THROW(emit_pgm({0, 0, {}}), std::invalid_argument);
  EXPECT_THROW(emit_pgm({1, 1, {std::nan("")}}), std::invalid_argument);
  EXPECT_THROW(emit_pgm({2, 1, {1.0}}), std::invalid_argument);
}

TEST(Io, FormatDouble) {
  EXPECT_EQ(format_double(0.1), "0.10000000000000001");
  EXPECT_EQ(format_double(2.0), "2");
  EXPECT_EQ(format_double(std::nan("")), "nan");
  EXPECT_EQ(format_double(-std::numeric_limits<double>::infinity()), "-inf");
  for (double x : {1.0 / 3.0, 1e-300, 123456.789, -2.5e17}) {
    EXPECT_EQ(std::strtod(format_double(x).c_str(), nullptr), x);
  }
}

TEST(Io, TrajectoryJsonl) {
  RunOptions o;
  o.driver = Driver::Shuffled;
  o.budget = 2;
  o.log_every = 1;
  o.snapshots = true;
  const TrajectoryLog log =
      run(make_divergence(3, 1.0), AdamConfig{}, {SamplingKind::Cyclic, 0}, Vec{1.0}, o);
  std::ostringstream out;
  write_trajectory_jsonl(out, log, true);
  std::istringstream in(out.str());
  std::string line;
  int count = 0;
  while (std::getline(in, line)) {
    const auto j = nlohmann::json::parse(line);
    for (const char* key : {"t", "k", "i", "batch", "eta", "objective", "full_grad_norm",
                            "step_norm", "x_norm", "x"}) {
      EXPECT_TRUE(j.contains(key)) << key;
    }
    EXPECT_EQ(j["batch"].get<int>(), count % 3);
    EXPECT_EQ(j["i"].get<int>(), count % 3);
    ++count;
  }
  EXPECT_EQ(count, 6);
}

TEST(Io, ReportsSerialize) {
  ConcentrationReport r;
  r.qualifying_steps = 10;
  r.p_bound = 1e-5;
  const auto j = nlohmann::json::parse(concentration_json(r));
  EXPECT_EQ(j["qualifying_steps"].get<int>(), 10);
  EXPECT_TRUE(j["within_bound"].is_null());
  const auto v = nlohmann::json::parse(violations_json({Violation{3, 0, "v", -1.0, 0.0}}));
  ASSERT_EQ(v.size(), 1u);
  EXPECT_EQ(v[0]["quantity"].get<std::string>(), "v");
}

TEST(Io, WriteFileReportsPath) {
  try {
    write_file("/proc/definitely/not/here.txt", "x");
    FAIL();
  } catch (const std::runtime_error& e) {
    EXPECT_NE(std::string(e.what()).find("/proc/definitely/not/here.txt"), std::string::npos);
  }
}
