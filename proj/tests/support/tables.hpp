#pragma once

#include <vector>

namespace cartan::testing {

/// Nonzero constant C^i_jk = num/den of a structure-equation table.
struct TableEntry {
  int i, j, k;
  long num, den;
};

/// u''' = u''^(3/2) through its branch-C coframe.
inline const std::vector<TableEntry> kQ3HalvesTable{
    {1, 1, 2, 1, 2},   {1, 1, 4, 1, 4},    {1, 2, 4, -1, 1},  {2, 1, 2, 3, 16},
    {2, 1, 3, 1, 1},   {2, 1, 4, -3, 32},  {2, 2, 3, -2, 1},  {2, 3, 4, -1, 1},
    {3, 2, 3, 1, 2},   {3, 2, 4, -3, 32},  {3, 3, 4, -1, 4},  {4, 1, 3, 1, 1},
    {4, 1, 4, -3, 16}, {4, 3, 4, -2, 1},
};

/// u''' = u''^3 through its branch-C coframe.
inline const std::vector<TableEntry> kQCubedTable{
    {1, 1, 2, -2, 5},    {1, 1, 3, -15, 1},  {1, 1, 4, 1, 25},  {1, 2, 4, -1, 1},
    {2, 1, 2, 2, 125},   {2, 1, 3, 1, 1},    {2, 2, 3, -5, 1},  {2, 2, 4, 2, 25},
    {2, 3, 4, -1, 1},    {3, 1, 2, -4, 3125}, {3, 1, 3, -7, 125}, {3, 2, 3, 1, 5},
    {3, 3, 4, 3, 25},    {4, 1, 3, 1, 1},    {4, 1, 4, -1, 125}, {4, 2, 4, 3, 5},
    {4, 3, 4, 10, 1},
};

}  // namespace cartan::testing
