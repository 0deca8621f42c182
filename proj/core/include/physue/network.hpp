#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

namespace physue {

/// Directed link with BPR cost parameters: t(x) = alpha + beta * x^4.
/// alpha is also the free-flow travel time t(0). The reverse direction,
/// when it exists, is an independent link with its own parameters.
struct Link {
  int from = 0;  // 1-based node id
  int to = 0;    // 1-based node id
  double alpha = 0.0;
  double beta = 0.0;
};

struct OdDemand {
  int origin = 0;
  int destination = 0;
  double rate = 0.0;  // vehicles per unit time
};

struct DemandSet {
  std::vector<OdDemand> demands;

  double total() const;
  double total_from(int origin) const;
};

/// Raised by the file parsers; `line` is the 1-based line number of the
/// offending row.
class ParseError : public std::runtime_error {
 public:
  ParseError(int line, const std::string& what);
  int line() const { return line_; }

 private:
  int line_;
};

/// Immutable directed network. Links keep ingestion order; node ids are
/// 1-based and dense in [1, node_count()]. Safe to share across threads
/// once constructed.
class Network {
 public:
  /// Builds a network from a link list, checking the structural invariants
  /// (no self-loops, no duplicate (from,to) pairs, alpha > 0, beta >= 0).
  static Network from_links(std::vector<Link> links);

  int node_count() const { return node_count_; }
  int link_count() const { return static_cast<int>(links_.size()); }
  const std::vector<Link>& links() const { return links_; }
  const Link& link(int index) const { return links_[index]; }

  /// Indices of links leaving / entering `node` (1-based), in link order.
  const std::vector<int>& out_links(int node) const { return out_[node - 1]; }
  const std::vector<int>& in_links(int node) const { return in_[node - 1]; }

  /// Index of the directed link (from,to), or -1 when that direction is
  /// absent (absence stands in for an infinite length; no sentinel values).
  int link_index(int from, int to) const;

  /// Index of the opposite-direction link, or -1.
  int reverse_link(int link_index) const { return reverse_[link_index]; }

  bool has_node(int node) const { return node >= 1 && node <= node_count_; }

 private:
  Network() = default;

  int node_count_ = 0;
  std::vector<Link> links_;
  std::vector<std::vector<int>> out_;
  std::vector<std::vector<int>> in_;
  std::vector<int> reverse_;
  std::unordered_map<std::int64_t, int> index_;
};

/// Parses the network CSV format: header `from,to,alpha,beta`, one data row
/// per directed link. Blank lines and lines starting with '#' are ignored.
Network parse_network(std::istream& in);
Network parse_network_file(const std::string& path);

/// Writes a network back in the same CSV format (row order preserved,
/// shortest round-trippable numbers).
void serialize_network(const Network& network, std::ostream& out);

/// Parses the demand CSV format: header `origin,destination,demand`.
DemandSet parse_demands(std::istream& in);
DemandSet parse_demands_file(const std::string& path);

/// BPR travel time alpha + beta * flow^4. Rejects negative flow.
double link_cost(const Link& link, double flow);

/// t(0) = alpha.
double free_flow_cost(const Link& link);

/// Closed-form integral of the BPR cost: alpha*x + beta*x^5/5.
double link_cost_integral(const Link& link, double flow);

std::vector<double> link_costs(const Network& network, std::span<const double> flows);
std::vector<double> free_flow_costs(const Network& network);

struct Diagnostic {
  enum class Kind { unknown_node, unreachable_destination };
  Kind kind;
  OdDemand demand;
  std::string message;
};

/// Checks that every demand references existing nodes and that each
/// destination is reachable from its origin through directed links.
/// Returns one diagnostic per violation; empty means valid.
std::vector<Diagnostic> validate(const Network& network, const DemandSet& demands);

}  // namespace physue
