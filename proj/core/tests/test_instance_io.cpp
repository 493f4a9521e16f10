#include <sstream>

#include <gtest/gtest.h>

#include "bhtbp/errors.hpp"
#include "bhtbp/instance_io.hpp"

namespace bhtbp {
namespace {

TEST(InstanceIo, RoundTripIsExact) {
  Rng rng(3);
  const auto phi = gen_sparse_matrix(40, 20, 3, rng);
  const auto x = gen_signal({40, 5, 10.0, 0.2, 3.0}, rng);
  const auto meas = measure(phi, x, Snr::decibels(17.0), rng);

  std::stringstream ss;
  write_instance(ss, phi, 123456789012345ULL, &x, &meas);
  const Instance back = read_instance(ss);

  EXPECT_EQ(back.seed, 123456789012345ULL);
  EXPECT_EQ(back.matrix.to_dense(), phi.to_dense());
  EXPECT_EQ(back.matrix.col_weight(), 3u);
  ASSERT_TRUE(back.signal);
  EXPECT_EQ(back.signal->values, x.values);
  EXPECT_EQ(back.signal->support, x.support);
  ASSERT_TRUE(back.measurement);
  EXPECT_EQ(back.measurement->z, meas.z);
  EXPECT_EQ(back.measurement->noise_std, meas.noise_std);
}

TEST(InstanceIo, HeaderAndColumnLines) {
  const auto phi = SparseBernoulliMatrix::from_columns(3, {{{0, 1}, {2, -1}}, {{1, -1}, {2, 1}}});
  std::stringstream ss;
  write_instance(ss, phi, 9);
  EXPECT_EQ(ss.str(), "2 3 2 9\n0:1,2:-1\n1:-1,2:1\n");
}

TEST(InstanceIo, MatrixOnlyAndZeroSignal) {
  const auto phi = SparseBernoulliMatrix::from_columns(2, {{{0, 1}}, {{1, 1}}});
  SparseSignal zero{{0.0, 0.0}, StateVector(2)};
  std::stringstream ss;
  write_instance(ss, phi, 1, &zero);
  const Instance back = read_instance(ss);
  ASSERT_TRUE(back.signal);
  EXPECT_EQ(back.signal->support.popcount(), 0u);
  EXPECT_FALSE(back.measurement);
}

TEST(InstanceIo, MalformedInputThrowsParseError) {
  const char* bad[] = {
      "",                             // no header
      "2 2 1\n0:1\n1:1\n",            // header missing seed
      "2 2 1 0\n0:1\n",               // truncated columns
      "2 2 1 0\n0:1\n5:1\n",          // row out of range
      "2 2 1 0\n0:1\n1:2\n",          // bad sign
      "2 2 2 0\n0:1\n1:1\n",          // declared weight mismatch
      "2 2 1 0\n0:1\n1:1\nx 7:1.0\n", // signal index out of range
      "2 2 1 0\n0:1\n1:1\nz 1.0\n",   // z length != m
      "2 2 1 0\n0:1\n1:1\nfoo 1\n",   // unknown record
      "2 2 1 0\n0;1\n1:1\n",          // bad pair separator
  };
  for (const char* text : bad) {
    std::stringstream ss(text);
    EXPECT_THROW(read_instance(ss), ParseError) << "input: " << text;
  }
}

}  // namespace
}  // namespace bhtbp
