#pragma once

#include <cstdint>
#include <vector>

#include "rectnet/errors.hpp"

namespace rectnet {

/**
 * Walks the 2^n subsets of {1..n} in the fixed enumeration used throughout
 * the library: row j (1-based) contains element i iff bit (i-1) of (j-1) is
 * set. Row 1 is the empty set, row 2^n the full set, and the first half of
 * the enumeration for n is exactly the enumeration for n-1.
 *
 * The matrix of membership indicators is only ever materialized for tests
 * and small n; everything else uses bit tests on the row index.
 */
struct SubsetEnumerator {
  std::size_t n;

  // Materializing beyond this many columns is almost certainly a bug.
  static constexpr std::size_t materialize_limit = 16;

  explicit SubsetEnumerator(std::size_t n_) : n(n_) {
    if (n > 63)
      throw CapExceeded(n, 63, "subset enumeration: 2^" + std::to_string(n) +
                                   " rows cannot be indexed");
  }

  std::uint64_t row_count() const { return std::uint64_t(1) << n; }

  // Does row j (1-based) contain element i (1-based)?
  static bool contains(std::uint64_t row, std::size_t i) {
    return ((row - 1) >> (i - 1)) & 1u;
  }

  // Full indicator table, rows[j-1][i-1] in {0,1}. Guarded by a hard cap;
  // pass force=true to override it knowingly.
  std::vector<std::vector<unsigned char>> materialize(bool force = false) const {
    if (n > materialize_limit && !force)
      throw CapExceeded(n, materialize_limit,
                        "subset table with 2^" + std::to_string(n) +
                            " rows; pass force to materialize anyway");
    std::vector<std::vector<unsigned char>> rows(row_count());
    for (std::uint64_t j = 1; j <= row_count(); ++j) {
      rows[j - 1].resize(n);
      for (std::size_t i = 1; i <= n; ++i) rows[j - 1][i - 1] = contains(j, i) ? 1 : 0;
    }
    return rows;
  }
};

}  // namespace rectnet
