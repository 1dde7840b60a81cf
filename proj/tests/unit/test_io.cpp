#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "hmlab/boundary_io.hpp"
#include "hmlab/error.hpp"
#include "hmlab/field_io.hpp"
#include "hmlab/report_io.hpp"
#include "hmlab/solver.hpp"

using namespace hmlab;

namespace {

Field sample_field() {
  const auto g = BoundarySet::flat(3, 1, 8.0, 0.125);
  GridSpec s;
  s.box = Box{Point{0.0, 0.0, 0.0}, Point{1.0, 1.0, 1.0}};
  s.h = 0.25;
  s.mirror = {true, false, true, false};
  const Grid grid(g, s);
  Field f = make_field(grid);
  for (std::size_t i = 0; i < f.size(); ++i) f[i] = std::sin(static_cast<double>(i));
  return f;
}

}  // namespace

TEST(FieldIo, BinaryRoundTrip) {
  const Field f = sample_field();
  std::stringstream ss;
  write_field(ss, f);
  const Field g = read_field(ss);
  EXPECT_EQ(g.info.n, f.info.n);
  EXPECT_EQ(g.info.dims, f.info.dims);
  EXPECT_EQ(g.info.mirror, f.info.mirror);
  EXPECT_EQ(g.info.h, f.info.h);
  EXPECT_EQ(g.gamma_hash, f.gamma_hash);
  EXPECT_EQ(g.values, f.values);
}

TEST(FieldIo, RejectsBadInput) {
  std::stringstream bad("NOPE");
  EXPECT_THROW(read_field(bad), Error);
  std::stringstream ss;
  write_field(ss, sample_field());
  std::string bytes = ss.str();
  bytes.resize(bytes.size() - 8);
  std::stringstream cut(bytes);
  try {
    read_field(cut);
    FAIL() << "expected IoError";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::IoError);
  }
  EXPECT_THROW(read_field(std::string("/nonexistent/field.bin")), Error);
}

TEST(FieldIo, SliceCsvHasOneRowPerNode) {
  const Field f = sample_field();
  std::ostringstream os;
  write_field_slice_csv(os, f, 2, 0.5);
  std::istringstream is(os.str());
  std::string line;
  int rows = -1;
  while (std::getline(is, line)) ++rows;
  EXPECT_EQ(rows, static_cast<int>(f.info.dims[0] * f.info.dims[1]));
}

TEST(ReportIo, RoundTripRecomputesPass) {
  EstimateReport r;
  r.id = "demo";
  r.scenario = "s";
  r.h = {0.25, 0.125};
  r.add(Quantity{"ratio", {1.0, 1.2}, 0.0, 10.0});
  r.add(Quantity{"slope", {-kInf, std::nan("")}, -1.0, 1.0, false, false});
  r.tables.push_back(Table{"t", {"a", "b"}, {{1.0, 2.0}}});
  r.notes.push_back("note, with comma");
  r.evaluate();
  r.pass = false;  // stale flag must not survive a round trip
  std::stringstream ss;
  write_report_json(ss, r);
  const EstimateReport back = read_report_json(ss);
  EXPECT_TRUE(back.pass);
  ASSERT_EQ(back.quantities.size(), 2u);
  EXPECT_EQ(back.quantities[0].values, r.quantities[0].values);
  EXPECT_EQ(back.quantities[1].values[0], -kInf);
  EXPECT_TRUE(std::isnan(back.quantities[1].values[1]));
  EXPECT_FALSE(back.quantities[1].gating);
  EXPECT_EQ(back.tables[0].rows, r.tables[0].rows);
  EXPECT_EQ(back.notes, r.notes);

  std::stringstream junk("{\"id\": 3");
  EXPECT_THROW(read_report_json(junk), Error);
}

TEST(ReportIo, RollupHasOneRowPerQuantity) {
  EstimateReport a;
  a.id = "a";
  a.add(Quantity{"x", {1.0}, 0.0, 2.0});
  a.evaluate();
  EstimateReport b;
  b.id = "b";
  b.add(Quantity{"y", {3.0, 4.0}, 0.0, 2.0});
  b.add(Quantity{"z", {1.0}});
  b.evaluate();
  std::ostringstream os;
  const std::vector<EstimateReport> reports = {a, b};
  write_rollup_csv(os, reports);
  std::istringstream is(os.str());
  std::string header, line;
  std::getline(is, header);
  EXPECT_EQ(header.rfind("estimate_id,scenario,quantity,observed", 0), 0u);
  int rows = 0;
  while (std::getline(is, line)) ++rows;
  EXPECT_EQ(rows, 3);
  EXPECT_NE(os.str().find("3;4"), std::string::npos);
  EXPECT_EQ(csv_cell("a,b"), "\"a,b\"");
  EXPECT_EQ(csv_cell("plain"), "plain");
}

TEST(BoundaryIo, JsonKinds) {
  const BoundarySet flat = parse_boundary(R"({"kind": "flat", "n": 3, "d": 1, "extent": 4, "spacing": 0.5})");
  EXPECT_EQ(flat.ambient_dim(), 3);
  EXPECT_DOUBLE_EQ(flat.hausdorff_dim(), 1.0);
  const BoundarySet cantor = parse_boundary(R"({"kind": "cantor", "level": 4})");
  EXPECT_EQ(cantor.patch_count(), 16u);
  const BoundarySet pts = parse_boundary(R"({"kind": "point_set", "points": [[0, 0, 0], [1, 0, 0]]})");
  EXPECT_EQ(pts.patch_count(), 2u);
  try {
    parse_boundary(R"({"kind": "flat", "n": 3, "d": 2, "extent": 4, "spacing": 0.5})");
    FAIL() << "expected ValidationError";
  } catch (const ValidationError& e) {
    ASSERT_FALSE(e.problems().empty());
    EXPECT_NE(e.problems().front().find("hausdorff_dim must be < n-1"), std::string::npos);
  }
}

TEST(BoundaryIo, CsvRoundTrip) {
  const BoundarySet g = BoundarySet::cantor(2, 3);
  std::stringstream ss;
  write_patches_csv(ss, g);
  const BoundarySet back = read_patches_csv(ss, g.hausdorff_dim());
  ASSERT_EQ(back.patch_count(), g.patch_count());
  for (std::size_t k = 0; k < g.patch_count(); ++k) {
    EXPECT_EQ(back.patches()[k].center, g.patches()[k].center);
    EXPECT_EQ(back.patches()[k].weight, g.patches()[k].weight);
  }
  std::stringstream bad("x1,x2,weight,radius\n0,zero,1,1\n");
  EXPECT_THROW(read_patches_csv(bad, 0.5), Error);
}
