#include <gtest/gtest.h>

#include <random>
#include <sstream>

#include "oracles.hpp"
#include "polcomp/io.hpp"

namespace polcomp {
namespace {

using testing::kDeg;

TEST(FormatDouble, RoundTripsRandomDoubles) {
  auto rng = testing::test_rng(51);
  std::uniform_real_distribution<double> mant(-1.0, 1.0);
  std::uniform_int_distribution<int> expo(-300, 300);
  for (int i = 0; i < 2000; ++i) {
    const double v = std::ldexp(mant(rng), expo(rng));
    EXPECT_EQ(std::stod(io::format_double(v)), v);
  }
  EXPECT_EQ(io::format_double(0.5), "0.5");
  EXPECT_EQ(io::format_double(3e6), "3000000");
}

TEST(Csv, QuotesOnlyWhenNeeded) {
  EXPECT_EQ(io::csv_field("dh"), "dh");
  EXPECT_EQ(io::csv_field("a,b"), "\"a,b\"");
  EXPECT_EQ(io::csv_field("say \"hi\""), "\"say \"\"hi\"\"\"");
  std::ostringstream os;
  io::CsvWriter w(os, {"channel", "epsilon_deg"});
  w.row({"q", "0.1"});
  EXPECT_EQ(os.str(), "channel,epsilon_deg\r\nq,0.1\r\n");
}

TEST(CompositeJson, RecordShapeAndRoundTrip) {
  const auto cm = ecm4({30 * kDeg, 13 * kDeg});
  const auto j = io::to_json(cm);
  ASSERT_EQ(j.at("settings").size(), 4u);
  EXPECT_NEAR(j["settings"][1]["q_deg"].get<double>(), 120.0, 1e-12);
  EXPECT_NEAR(j["settings"][1]["h_deg"].get<double>(), 17.0, 1e-12);
  EXPECT_DOUBLE_EQ(j["weights"][3].get<double>(), 0.25);
  EXPECT_EQ(j["ideal_vector"].size(), 3u);

  const auto back = io::composite_from_json(nlohmann::json::parse(j.dump()));
  ASSERT_EQ(back.size(), cm.size());
  for (std::size_t i = 0; i < cm.size(); ++i) {
    EXPECT_NEAR(back.settings()[i].q, cm.settings()[i].q, 1e-14);
    EXPECT_NEAR(back.settings()[i].h, cm.settings()[i].h, 1e-14);
  }
}

TEST(BudgetJson, CarriesAllChannels) {
  const auto b = predicted_error_budget({BlochVector(0.346, -0.446, 0.425)},
                                        {0.1 * kDeg, 0.1 * kDeg, 1.2 * kDeg, 1.2 * kDeg});
  const auto j = io::to_json(b);
  for (const char* ch : {"q", "h", "dq", "dh"}) {
    EXPECT_TRUE(j["ncm"]["channel_errors"].contains(ch));
    EXPECT_TRUE(j["ncm"]["coefficients"].contains(ch));
  }
  EXPECT_DOUBLE_EQ(j["ncm"]["total"].get<double>(), b.ncm_total);
  EXPECT_DOUBLE_EQ(j["ecm"]["total"].get<double>(), b.ecm_total);
}

}  // namespace
}  // namespace polcomp
