#pragma once

// Port-graph rendering of categorical terms.
//
// A CatTerm folds into a dataflow graph at scalar granularity: every wire
// carries one real number, every operation is a labeled node, and sharing is
// explicit as "dup" fan-out nodes. The graphs are a visualization artifact
// only; differentiation never consults them.
//
// to_graph    builds the plain dataflow graph of a term.
// to_graph_d  additionally renders the derivative as a boxed subgraph beside
//             the primal graph. In forward mode the box maps input tangents
//             to output tangents, left to right. In dual (and cont) mode the
//             box is the adjoint: it maps output cotangents back to input
//             cotangents, with the primal's dup nodes appearing as additions
//             and its additions as dups. Nonlinear primitives contribute
//             "scale" nodes whose coefficients are tapped off primal wires.
// emit_dot    prints GraphViz DOT text, deterministically.
//
// Graphs are pruned after construction: operations whose results are never
// consumed are dropped, fan-outs with a single live consumer collapse to a
// plain wire, and additions fed by structural zeros forget those inputs.

#include <cstddef>
#include <string>
#include <vector>

#include "catgrad/expr.hpp"

namespace catgrad {

struct GraphNode {
  std::string label;
  std::vector<std::size_t> ins;   // wire ids consumed, in port order
  std::vector<std::size_t> outs;  // wire ids produced, in port order
  bool boxed = false;             // lives inside the derivative subgraph
};

// Wires are single-producer, single-consumer; fan-out only ever happens
// through an explicit dup node. Producers are node out-ports, graph input
// ports, or derivative-box input ports; consumers are node in-ports, graph
// output ports, or derivative-box output ports.
struct PortGraph {
  std::vector<GraphNode> nodes;        // in topological order
  std::vector<std::size_t> inputs;     // one wire per scalar leaf of the domain
  std::vector<std::size_t> outputs;    // one wire per scalar leaf of the codomain
  std::vector<std::size_t> d_inputs;   // derivative-box inputs (empty for plain graphs)
  std::vector<std::size_t> d_outputs;  // derivative-box outputs
  std::string box_label;               // cluster caption when a box is present
  std::string d_in_name, d_out_name;   // box port prefixes ("dx"/"dy")
  std::size_t wire_count = 0;

  std::size_t fresh() { return wire_count++; }
};

enum class DerivMode { Forward, Cont, Dual };

// Number of nodes with exactly this label, over the whole graph.
std::size_t count_nodes(const PortGraph& g, const std::string& label);
// Same, restricted to the derivative box.
std::size_t count_box_nodes(const PortGraph& g, const std::string& label);
std::size_t total_box_nodes(const PortGraph& g);

PortGraph to_graph(const TermPtr& t);
PortGraph to_graph_d(const TermPtr& t, DerivMode mode);

std::string emit_dot(const PortGraph& g);

}  // namespace catgrad
