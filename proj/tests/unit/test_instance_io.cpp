#include <gtest/gtest.h>

#include <filesystem>

#include "osmm/instance_io.hpp"

namespace osmm {
namespace {

void expect_same_instance(const ProblemInstance& a, const ProblemInstance& b) {
  EXPECT_EQ(a.kind, b.kind);
  EXPECT_EQ(a.params, b.params);
  ASSERT_EQ(a.arrays.size(), b.arrays.size());
  for (const auto& [name, arr] : a.arrays) {
    ASSERT_TRUE(b.arrays.count(name)) << name;
    EXPECT_TRUE((arr.array() == b.arrays.at(name).array()).all()) << name;
  }
  EXPECT_TRUE((a.x0.array() == b.x0.array()).all());
  EXPECT_EQ(a.g.dim, b.g.dim);
  EXPECT_EQ(a.g.simplex.has_value(), b.g.simplex.has_value());
  EXPECT_EQ(a.g.box.has_value(), b.g.box.has_value());
  EXPECT_EQ(a.g.l1_ball.has_value(), b.g.l1_ball.has_value());
  EXPECT_EQ(a.g.hinge_budget.has_value(), b.g.hinge_budget.has_value());
  EXPECT_EQ(a.g.equalities.has_value(), b.g.equalities.has_value());
}

TEST(InstanceIo, RoundTripEveryKind) {
  for (const ProblemInstance& inst :
       {gen_kelly(4, 50, 1, true), gen_cvar_portfolio(2, 40, 1), gen_density(100, 50, 1), gen_newsvendor(3, 40, 1)}) {
    const ProblemInstance back = deserialize_instance(serialize_instance(inst));
    expect_same_instance(inst, back);
    Oracle o1 = inst.make_oracle();
    Oracle o2 = back.make_oracle();
    EXPECT_EQ(o1.value(inst.x0), o2.value(back.x0)) << inst.kind;
    EXPECT_EQ(eval_g(inst.g, inst.x0), eval_g(back.g, back.x0)) << inst.kind;
  }
}

TEST(InstanceIo, FileRoundTrip) {
  const auto path = std::filesystem::temp_directory_path() / "osmm_io_test.bin";
  const ProblemInstance inst = gen_newsvendor(2, 30, 4);
  save_instance(inst, path);
  expect_same_instance(inst, load_instance(path));
  std::filesystem::remove(path);
}

TEST(InstanceIo, RejectsGarbage) {
  try {
    deserialize_instance("not an instance");
    FAIL() << "expected InvalidArgument";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::InvalidArgument);
  }
  std::string bytes = serialize_instance(gen_kelly(2, 3, 0));
  bytes.resize(bytes.size() - 8);
  EXPECT_THROW(deserialize_instance(bytes), Error);
}

TEST(InstanceIo, MissingFileIsIoError) {
  try {
    load_instance("/nonexistent/dir/instance.bin");
    FAIL() << "expected Io";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::Io);
  }
}

}  // namespace
}  // namespace osmm
