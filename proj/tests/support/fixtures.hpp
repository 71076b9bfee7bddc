#pragma once

#include "prefix_dse/prefix_graph.hpp"

namespace fixtures {

// Six-bit network with size 8, level 3 and mfo 2. o5 = b2 o o3.
inline prefix_dse::PrefixGraph six_bit() {
  prefix_dse::PrefixGraphBuilder b(6);
  const auto o1 = b.combine(b.input(1), b.input(0));
  const auto b1 = b.combine(b.input(3), b.input(2));
  const auto b2 = b.combine(b.input(5), b.input(4));
  const auto m21 = b.combine(b.input(2), b.input(1));
  b.combine(m21, b.input(0));          // o2
  const auto o3 = b.combine(b1, o1);
  b.combine(b.input(4), o3);           // o4
  b.combine(b2, o3);                   // o5
  return b.build();
}

// Eight-bit network whose fan-outs give the spfo walk-through values:
// spfo(o1)=2, spfo(b1)=3, spfo(b2)=3, spfo(o3)=10, spfo(o5)=19.
struct SpfoExample {
  prefix_dse::PrefixGraph graph;
  prefix_dse::NodeId o1, b1, b2, o3, o5;
};

inline SpfoExample spfo_example() {
  prefix_dse::PrefixGraphBuilder b(8);
  const auto o1 = b.combine(b.input(1), b.input(0));
  const auto b1 = b.combine(b.input(3), b.input(2));
  const auto b2 = b.combine(b.input(5), b.input(4));
  const auto b3 = b.combine(b.input(7), b.input(6));
  b.combine(b.input(2), o1);                        // o2
  const auto m42 = b.combine(b.input(4), b1);
  const auto o3 = b.combine(b1, o1);
  const auto m64 = b.combine(b.input(6), b2);
  const auto m74 = b.combine(b3, b2);
  b.combine(m42, o1);                               // o4
  b.combine(b2, o3);                                // o5
  b.combine(m64, o3);                               // o6
  b.combine(m74, o3);                               // o7
  auto g = b.build();
  auto id = [&](int msb, int lsb) {
    for (const auto& n : g.nodes())
      if (n.msb == msb && n.lsb == lsb) return n.id;
    return prefix_dse::NodeId{0};
  };
  return {g, id(1, 0), id(3, 2), id(5, 4), id(3, 0), id(5, 0)};
}

}  // namespace fixtures
