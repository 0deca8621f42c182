#pragma once

#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "physue/network.hpp"
#include "physue/solvers.hpp"

namespace physue {

/// One row of a link-flow CSV.
struct FlowRecord {
  int from = 0;
  int to = 0;
  double flow = 0.0;
};

struct FlowsFile {
  std::vector<FlowRecord> records;
};

/// Writes `from,to,flow,flow_exact`: flow rounded to four decimals for
/// reading, flow_exact as the shortest digit string that round-trips the
/// double exactly.
void write_flows_csv(const Network& network, std::span<const double> flows,
                     std::ostream& out);
void write_flows_csv_file(const Network& network, std::span<const double> flows,
                          const std::string& path);

/// Reads a flows CSV. The flow_exact column is preferred when present.
FlowsFile read_flows_csv(std::istream& in);
FlowsFile read_flows_csv_file(const std::string& path);

/// Reorders parsed records into the network's link order. Throws
/// std::invalid_argument when a record names an unknown link or a link is
/// missing or duplicated.
std::vector<double> align_flows(const Network& network, const FlowsFile& flows);

/// Everything needed to reproduce a run byte for byte. Serialized as a JSON
/// sidecar next to the flows file; deliberately carries no timestamps.
struct RunManifest {
  std::string network_path;
  std::string demands_path;
  std::string out_path;
  std::string trace_path;  // empty when no trace was requested
  SolverConfig config;
  std::string tool_version;
  std::string rng_id;
};

std::string manifest_to_json(const RunManifest& manifest);
RunManifest manifest_from_json(const std::string& text);
void write_manifest_file(const RunManifest& manifest, const std::string& path);
RunManifest read_manifest_file(const std::string& path);

/// Writes trace rows `outer_iter,epsilon,elapsed_ms,truncations` as the
/// observer fires. Truncations are cumulative.
class TraceWriter {
 public:
  explicit TraceWriter(std::ostream& out);
  void record(const OuterIterationEvent& event);

 private:
  std::ostream* out_;
};

/// Graphviz digraph of the network. When flows are given, edges are
/// annotated with flow values, penwidth scales with flow, and edges carrying
/// less than min_visible_flow are dashed.
void export_dot(const Network& network, const std::vector<double>* flows,
                std::ostream& out, double min_visible_flow = 0.05);

}  // namespace physue
