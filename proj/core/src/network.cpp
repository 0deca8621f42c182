#include "physue/network.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <deque>
#include <fstream>
#include <map>
#include <sstream>
#include <utility>

#include "format.hpp"

namespace physue {

namespace {

std::int64_t pair_key(int from, int to) {
  return (static_cast<std::int64_t>(from) << 32) | static_cast<std::uint32_t>(to);
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() &&
         (s.back() == ' ' || s.back() == '\t' || s.back() == '\r' || s.back() == '\n'))
    s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  while (true) {
    std::size_t comma = line.find(',', start);
    if (comma == std::string_view::npos) {
      fields.push_back(trim(line.substr(start)));
      break;
    }
    fields.push_back(trim(line.substr(start, comma - start)));
    start = comma + 1;
  }
  return fields;
}

int parse_int_field(std::string_view field, int line, const char* name) {
  int value = 0;
  auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
  if (ec != std::errc{} || ptr != field.data() + field.size())
    throw ParseError(line, std::string("invalid integer for ") + name + ": '" +
                               std::string(field) + "'");
  return value;
}

double parse_double_field(std::string_view field, int line, const char* name) {
  double value = 0.0;
  auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
  if (ec != std::errc{} || ptr != field.data() + field.size())
    throw ParseError(line, std::string("invalid number for ") + name + ": '" +
                               std::string(field) + "'");
  if (!std::isfinite(value))
    throw ParseError(line, std::string(name) + " must be finite");
  return value;
}

bool skippable(std::string_view line) {
  auto t = trim(line);
  return t.empty() || t.front() == '#';
}

}  // namespace

double DemandSet::total() const {
  double sum = 0.0;
  for (const auto& d : demands) sum += d.rate;
  return sum;
}

double DemandSet::total_from(int origin) const {
  double sum = 0.0;
  for (const auto& d : demands)
    if (d.origin == origin) sum += d.rate;
  return sum;
}

ParseError::ParseError(int line, const std::string& what)
    : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}

Network Network::from_links(std::vector<Link> links) {
  Network net;
  int max_node = 0;
  for (std::size_t i = 0; i < links.size(); ++i) {
    const Link& l = links[i];
    if (l.from < 1 || l.to < 1)
      throw std::invalid_argument("link " + std::to_string(i) + ": node ids must be >= 1");
    if (l.from == l.to)
      throw std::invalid_argument("link " + std::to_string(i) + ": self-loop " +
                                  std::to_string(l.from) + "->" + std::to_string(l.to));
    if (!(l.alpha > 0.0))
      throw std::invalid_argument("link " + std::to_string(i) + ": alpha must be > 0");
    if (l.beta < 0.0)
      throw std::invalid_argument("link " + std::to_string(i) + ": beta must be >= 0");
    auto [it, inserted] = net.index_.emplace(pair_key(l.from, l.to), static_cast<int>(i));
    if (!inserted)
      throw std::invalid_argument("duplicate link " + std::to_string(l.from) + "->" +
                                  std::to_string(l.to));
    max_node = std::max({max_node, l.from, l.to});
  }

  std::vector<char> seen(static_cast<std::size_t>(max_node) + 1, 0);
  for (const Link& l : links) {
    seen[l.from] = 1;
    seen[l.to] = 1;
  }
  for (int node = 1; node <= max_node; ++node)
    if (!seen[node])
      throw std::invalid_argument("node ids must be dense: " + std::to_string(node) +
                                  " is missing");

  net.node_count_ = max_node;
  net.links_ = std::move(links);
  net.out_.resize(max_node);
  net.in_.resize(max_node);
  net.reverse_.assign(net.links_.size(), -1);
  for (std::size_t i = 0; i < net.links_.size(); ++i) {
    const Link& l = net.links_[i];
    net.out_[l.from - 1].push_back(static_cast<int>(i));
    net.in_[l.to - 1].push_back(static_cast<int>(i));
    auto rev = net.index_.find(pair_key(l.to, l.from));
    if (rev != net.index_.end()) net.reverse_[i] = rev->second;
  }
  return net;
}

int Network::link_index(int from, int to) const {
  auto it = index_.find(pair_key(from, to));
  return it == index_.end() ? -1 : it->second;
}

Network parse_network(std::istream& in) {
  std::string line;
  int line_no = 0;
  bool header_seen = false;
  std::vector<Link> links;
  while (std::getline(in, line)) {
    ++line_no;
    if (skippable(line)) continue;
    auto fields = split_fields(trim(line));
    if (!header_seen) {
      if (fields.size() != 4 || fields[0] != "from" || fields[1] != "to" ||
          fields[2] != "alpha" || fields[3] != "beta")
        throw ParseError(line_no, "expected header 'from,to,alpha,beta'");
      header_seen = true;
      continue;
    }
    if (fields.size() != 4)
      throw ParseError(line_no, "expected 4 fields, got " + std::to_string(fields.size()));
    Link l;
    l.from = parse_int_field(fields[0], line_no, "from");
    l.to = parse_int_field(fields[1], line_no, "to");
    l.alpha = parse_double_field(fields[2], line_no, "alpha");
    l.beta = parse_double_field(fields[3], line_no, "beta");
    links.push_back(l);
  }
  if (!header_seen) throw ParseError(line_no == 0 ? 1 : line_no, "missing header row");
  if (links.empty()) throw ParseError(line_no, "no links");
  try {
    return Network::from_links(std::move(links));
  } catch (const std::invalid_argument& e) {
    throw ParseError(line_no, e.what());
  }
}

Network parse_network_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open network file: " + path);
  return parse_network(in);
}

void serialize_network(const Network& network, std::ostream& out) {
  out << "from,to,alpha,beta\n";
  for (const Link& l : network.links())
    out << l.from << ',' << l.to << ',' << detail::shortest_double(l.alpha) << ','
        << detail::shortest_double(l.beta) << '\n';
}

DemandSet parse_demands(std::istream& in) {
  std::string line;
  int line_no = 0;
  bool header_seen = false;
  DemandSet set;
  std::map<std::pair<int, int>, int> seen;  // (o,d) -> line
  while (std::getline(in, line)) {
    ++line_no;
    if (skippable(line)) continue;
    auto fields = split_fields(trim(line));
    if (!header_seen) {
      if (fields.size() != 3 || fields[0] != "origin" || fields[1] != "destination" ||
          fields[2] != "demand")
        throw ParseError(line_no, "expected header 'origin,destination,demand'");
      header_seen = true;
      continue;
    }
    if (fields.size() != 3)
      throw ParseError(line_no, "expected 3 fields, got " + std::to_string(fields.size()));
    OdDemand d;
    d.origin = parse_int_field(fields[0], line_no, "origin");
    d.destination = parse_int_field(fields[1], line_no, "destination");
    d.rate = parse_double_field(fields[2], line_no, "demand");
    if (d.origin == d.destination)
      throw ParseError(line_no, "origin equals destination (" + std::to_string(d.origin) + ")");
    if (!(d.rate > 0.0)) throw ParseError(line_no, "demand must be > 0");
    auto [it, inserted] = seen.emplace(std::pair{d.origin, d.destination}, line_no);
    if (!inserted)
      throw ParseError(line_no, "duplicate OD pair " + std::to_string(d.origin) + "->" +
                                    std::to_string(d.destination) + " (first on line " +
                                    std::to_string(it->second) + ")");
    set.demands.push_back(d);
  }
  if (!header_seen) throw ParseError(line_no == 0 ? 1 : line_no, "missing header row");
  if (set.demands.empty()) throw ParseError(line_no, "no demands");
  return set;
}

DemandSet parse_demands_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open demand file: " + path);
  return parse_demands(in);
}

double link_cost(const Link& link, double flow) {
  if (flow < 0.0) throw std::invalid_argument("negative flow on link");
  double f2 = flow * flow;
  return link.alpha + link.beta * f2 * f2;
}

double free_flow_cost(const Link& link) { return link.alpha; }

double link_cost_integral(const Link& link, double flow) {
  if (flow < 0.0) throw std::invalid_argument("negative flow on link");
  double f2 = flow * flow;
  return link.alpha * flow + link.beta * f2 * f2 * flow / 5.0;
}

std::vector<double> link_costs(const Network& network, std::span<const double> flows) {
  if (flows.size() != static_cast<std::size_t>(network.link_count()))
    throw std::invalid_argument("flow vector size does not match link count");
  std::vector<double> costs(flows.size());
  for (std::size_t i = 0; i < flows.size(); ++i)
    costs[i] = link_cost(network.link(static_cast<int>(i)), flows[i]);
  return costs;
}

std::vector<double> free_flow_costs(const Network& network) {
  std::vector<double> costs(network.link_count());
  for (int i = 0; i < network.link_count(); ++i) costs[i] = network.link(i).alpha;
  return costs;
}

std::vector<Diagnostic> validate(const Network& network, const DemandSet& demands) {
  std::vector<Diagnostic> out;
  std::map<int, std::vector<char>> reachable_from;  // origin -> node bitmap

  auto reach = [&](int origin) -> const std::vector<char>& {
    auto it = reachable_from.find(origin);
    if (it != reachable_from.end()) return it->second;
    std::vector<char> mark(network.node_count() + 1, 0);
    std::deque<int> queue{origin};
    mark[origin] = 1;
    while (!queue.empty()) {
      int node = queue.front();
      queue.pop_front();
      for (int li : network.out_links(node)) {
        int next = network.link(li).to;
        if (!mark[next]) {
          mark[next] = 1;
          queue.push_back(next);
        }
      }
    }
    return reachable_from.emplace(origin, std::move(mark)).first->second;
  };

  for (const OdDemand& d : demands.demands) {
    bool nodes_ok = true;
    for (int node : {d.origin, d.destination}) {
      if (!network.has_node(node)) {
        out.push_back({Diagnostic::Kind::unknown_node, d,
                       "node " + std::to_string(node) + " does not exist"});
        nodes_ok = false;
      }
    }
    if (!nodes_ok) continue;
    if (!reach(d.origin)[d.destination])
      out.push_back({Diagnostic::Kind::unreachable_destination, d,
                     "destination " + std::to_string(d.destination) +
                         " unreachable from origin " + std::to_string(d.origin)});
  }
  return out;
}

}  // namespace physue
