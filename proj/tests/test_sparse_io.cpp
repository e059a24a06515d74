#include <gtest/gtest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>

#include "snchol/matrix_market.hpp"
#include "snchol/sparse.hpp"
#include "support/oracles.hpp"

namespace {

using namespace snchol;

std::string write_temp(const std::string& text) {
  static int counter = 0;
  auto path = std::filesystem::temp_directory_path() /
              ("snchol_io_" + std::to_string(::getpid()) + "_" +
               std::to_string(counter++) + ".mtx");
  std::ofstream out(path);
  out << text;
  return path.string();
}

TEST(MatrixIo, IdentityCoordinateForm) {
  const std::string path = write_temp(
      "%%MatrixMarket matrix coordinate real symmetric\n"
      "% comment line\n"
      "3 3 3\n"
      "1 1 1.0\n2 2 1.0\n3 3 1.0\n");
  const SparseSymmetric a = read_matrix_market(path);
  EXPECT_EQ(a.n, 3);
  EXPECT_EQ(a.nnz(), 3);
  for (double v : a.values) EXPECT_EQ(v, 1.0);
  EXPECT_NEAR(density(a), 1.0 / 3.0, 1e-15);
  std::remove(path.c_str());
}

TEST(MatrixIo, DuplicateEntriesSum) {
  const std::string path = write_temp(
      "%%MatrixMarket matrix coordinate real symmetric\n"
      "3 3 5\n"
      "1 1 2.0\n2 2 2.0\n3 3 2.0\n"
      "2 1 0.5\n2 1 0.5\n");
  const SparseSymmetric a = read_matrix_market(path);
  EXPECT_EQ(a.nnz(), 4);
  // stored column 0: rows {0,1}, the duplicate summed to 1.0
  EXPECT_EQ(a.col_ptr[1] - a.col_ptr[0], 2);
  EXPECT_EQ(a.values[1], 1.0);
  std::remove(path.c_str());
}

TEST(MatrixIo, ArrowheadColPtr) {
  const std::string path = write_temp(
      "%%MatrixMarket matrix coordinate real symmetric\n"
      "4 4 7\n"
      "1 1 4.0\n2 2 4.0\n3 3 4.0\n4 4 4.0\n"
      "4 1 1.0\n4 2 1.0\n4 3 1.0\n");
  const SparseSymmetric a = read_matrix_market(path);
  const std::vector<index_t> expect{0, 2, 4, 6, 7};
  EXPECT_EQ(a.col_ptr, expect);
  EXPECT_EQ(a.nnz_full, 10);
  EXPECT_NEAR(density(a), 10.0 / 16.0, 1e-15);
  std::remove(path.c_str());
}

TEST(MatrixIo, DenseTwoByTwoDensityIsOne) {
  const SparseSymmetric a =
      from_triplets(2, {0, 1, 1}, {0, 1, 0}, {4.0, 9.0, 1.0});
  EXPECT_EQ(density(a), 1.0);
}

TEST(MatrixIo, IntegerFieldWidened) {
  const std::string path = write_temp(
      "%%MatrixMarket matrix coordinate integer symmetric\n"
      "2 2 3\n1 1 4\n2 2 9\n2 1 1\n");
  const SparseSymmetric a = read_matrix_market(path);
  EXPECT_EQ(a.values[0], 4.0);
  std::remove(path.c_str());
}

TEST(MatrixIo, UpperTriangleEntriesMirrored) {
  const std::string path = write_temp(
      "%%MatrixMarket matrix coordinate real symmetric\n"
      "2 2 3\n1 1 4.0\n2 2 9.0\n1 2 1.0\n");
  const SparseSymmetric a = read_matrix_market(path);
  EXPECT_EQ(a.row_idx[1], 1);  // (0,1) lands at (1,0)
  EXPECT_EQ(a.values[1], 1.0);
  std::remove(path.c_str());
}

TEST(MatrixIo, RejectsMalformedHeader) {
  const std::string path = write_temp("%%NotMatrixMarket nonsense\n1 1 1\n");
  EXPECT_THROW(read_matrix_market(path), ParseError);
  std::remove(path.c_str());
}

TEST(MatrixIo, RejectsGeneralSymmetry) {
  const std::string path = write_temp(
      "%%MatrixMarket matrix coordinate real general\n"
      "2 2 1\n1 1 1.0\n");
  EXPECT_THROW(read_matrix_market(path), ParseError);
  std::remove(path.c_str());
}

TEST(MatrixIo, RejectsPatternFiles) {
  const std::string path = write_temp(
      "%%MatrixMarket matrix coordinate pattern symmetric\n"
      "2 2 1\n1 1\n");
  EXPECT_THROW(read_matrix_market(path), ParseError);
  std::remove(path.c_str());
}

TEST(MatrixIo, RejectsOutOfRangeIndices) {
  const std::string path = write_temp(
      "%%MatrixMarket matrix coordinate real symmetric\n"
      "2 2 2\n1 1 1.0\n5 1 1.0\n");
  EXPECT_THROW(read_matrix_market(path), ParseError);
  std::remove(path.c_str());
}

TEST(MatrixIo, MissingDiagonalReportsColumn) {
  const std::string path = write_temp(
      "%%MatrixMarket matrix coordinate real symmetric\n"
      "3 3 3\n1 1 1.0\n3 3 1.0\n2 1 0.5\n");
  try {
    read_matrix_market(path);
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_NE(std::string(e.what()).find("column 1"), std::string::npos);
  }
  std::remove(path.c_str());
}

TEST(MatrixIo, MissingFileFails) {
  EXPECT_THROW(read_matrix_market("/nonexistent/matrix.mtx"), ParseError);
}

TEST(MatrixIo, RoundTripIsExact) {
  std::mt19937_64 rng(42);
  for (int trial = 0; trial < 10; ++trial) {
    const SparseSymmetric a = oracle::random_spd(rng, 40 + trial * 13, 0.1);
    const std::string path = write_temp("");
    write_matrix_market(a, path);
    const SparseSymmetric b = read_matrix_market(path);
    EXPECT_EQ(a.n, b.n);
    EXPECT_EQ(a.col_ptr, b.col_ptr);
    EXPECT_EQ(a.row_idx, b.row_idx);
    EXPECT_EQ(a.values, b.values);
    EXPECT_EQ(a.nnz_full, b.nnz_full);
    std::remove(path.c_str());
  }
}

TEST(MatrixIo, StoredCountMatchesColPtr) {
  std::mt19937_64 rng(7);
  const SparseSymmetric a = oracle::random_spd(rng, 60, 0.2);
  EXPECT_EQ(a.col_ptr[a.n], static_cast<index_t>(a.row_idx.size()));
  EXPECT_NO_THROW(validate(a));
}

}  // namespace
