#include "zic/data.hpp"

namespace zic {

namespace {

struct Freq {
  int roots;
  int count;
};

// Frequency table per treatment cell, 8h block then 16h, BAP ascending.
constexpr Freq k8_22[] = {{1, 3}, {3, 6}, {4, 5}, {5, 4}, {6, 2}, {7, 2}, {8, 1},
                          {10, 5}, {13, 1}, {17, 1}};
constexpr Freq k8_44[] = {{2, 3}, {5, 2}, {6, 3}, {7, 5}, {8, 3}, {9, 8}, {11, 5},
                          {13, 1}};
constexpr Freq k8_88[] = {{2, 1}, {3, 3}, {5, 11}, {6, 1}, {7, 2}, {8, 6}, {9, 5},
                          {10, 1}, {11, 8}, {12, 1}, {13, 1}};
constexpr Freq k8_176[] = {{0, 2}, {3, 3}, {5, 3}, {6, 6}, {7, 8}, {8, 6}, {9, 4},
                           {10, 4}, {12, 2}, {13, 2}};
constexpr Freq k16_22[] = {{0, 15}, {3, 5}, {5, 1}, {6, 2}, {8, 1}, {9, 3},
                           {10, 1}, {11, 1}, {12, 1}};
constexpr Freq k16_44[] = {{0, 16}, {1, 2}, {2, 1}, {3, 1}, {4, 2}, {5, 1}, {6, 2},
                           {8, 1}, {10, 3}, {12, 1}};
constexpr Freq k16_88[] = {{0, 12}, {1, 2}, {2, 2}, {3, 2}, {4, 2}, {5, 3}, {6, 3},
                           {7, 1}, {9, 1}, {12, 1}, {13, 1}};
constexpr Freq k16_176[] = {{0, 19}, {2, 3}, {3, 4}, {4, 4}, {5, 1}, {6, 4},
                            {7, 3}, {9, 2}};

struct CellDef {
  int photo;  // level index into {8, 16}
  int bap;    // level index into {2.2, 4.4, 8.8, 17.6}
  const Freq* freq;
  std::size_t len;
};

constexpr CellDef kCells[] = {
    {0, 0, k8_22, std::size(k8_22)},    {0, 1, k8_44, std::size(k8_44)},
    {0, 2, k8_88, std::size(k8_88)},    {0, 3, k8_176, std::size(k8_176)},
    {1, 0, k16_22, std::size(k16_22)},  {1, 1, k16_44, std::size(k16_44)},
    {1, 2, k16_88, std::size(k16_88)},  {1, 3, k16_176, std::size(k16_176)},
};

}  // namespace

ObservationTable trajan() {
  ObservationTable t;
  t.response_name = "roots";
  t.factors = {
      Factor{"photoperiod", "photo", {"8", "16"}},
      Factor{"bap", "bap", {"2.2", "4.4", "8.8", "17.6"}},
  };
  t.codes.resize(2);
  for (const auto& cell : kCells) {
    for (std::size_t e = 0; e < cell.len; ++e) {
      for (int k = 0; k < cell.freq[e].count; ++k) {
        t.response.push_back(cell.freq[e].roots);
        t.codes[0].push_back(cell.photo);
        t.codes[1].push_back(cell.bap);
      }
    }
  }
  return t;
}

}  // namespace zic
