#include "physue/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <ostream>
#include <sstream>
#include <vector>

#include <json.hpp>

#include "format.hpp"
#include "physue/version.hpp"

namespace physue {

namespace {

using ordered_json = nlohmann::ordered_json;

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

const char* solver_name(SolverKind kind) {
  return kind == SolverKind::physarum ? "physarum" : "msa";
}

SolverKind solver_from_name(const std::string& name) {
  if (name == "physarum") return SolverKind::physarum;
  if (name == "msa") return SolverKind::msa;
  throw std::runtime_error("unknown solver '" + name + "'");
}

}  // namespace

void write_flows_csv(const Network& network, std::span<const double> flows,
                     std::ostream& out) {
  if (flows.size() != static_cast<std::size_t>(network.link_count()))
    throw std::invalid_argument("flow vector does not match link count");
  out << "from,to,flow,flow_exact\n";
  for (int a = 0; a < network.link_count(); ++a) {
    const Link& link = network.link(a);
    out << link.from << ',' << link.to << ',' << detail::fixed_double(flows[a], 4) << ','
        << detail::shortest_double(flows[a]) << '\n';
  }
}

void write_flows_csv_file(const Network& network, std::span<const double> flows,
                          const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open flows file for writing: " + path);
  write_flows_csv(network, flows, out);
  if (!out) throw std::runtime_error("failed writing flows file: " + path);
}

FlowsFile read_flows_csv(std::istream& in) {
  std::string line;
  int line_no = 0;
  bool header_seen = false;
  bool has_exact = false;
  FlowsFile file;
  while (std::getline(in, line)) {
    ++line_no;
    auto trimmed = trim(line);
    if (trimmed.empty() || trimmed.front() == '#') continue;
    auto fields = split_fields(trimmed);
    if (!header_seen) {
      if (fields.size() < 3 || fields[0] != "from" || fields[1] != "to" ||
          fields[2] != "flow" || (fields.size() == 4 && fields[3] != "flow_exact") ||
          fields.size() > 4)
        throw ParseError(line_no, "expected header 'from,to,flow[,flow_exact]'");
      has_exact = fields.size() == 4;
      header_seen = true;
      continue;
    }
    if (fields.size() != (has_exact ? 4u : 3u))
      throw ParseError(line_no, "wrong field count");
    FlowRecord rec;
    rec.from = parse_int_field(fields[0], line_no, "from");
    rec.to = parse_int_field(fields[1], line_no, "to");
    // flow_exact carries the full-precision value; the flow column is the
    // rounded display copy.
    rec.flow = parse_double_field(has_exact && !fields[3].empty() ? fields[3] : fields[2],
                                  line_no, "flow");
    if (rec.flow < 0.0) throw ParseError(line_no, "flow must be >= 0");
    file.records.push_back(rec);
  }
  if (!header_seen) throw ParseError(line_no == 0 ? 1 : line_no, "missing header row");
  if (file.records.empty()) throw ParseError(line_no, "no flow rows");
  return file;
}

FlowsFile read_flows_csv_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open flows file: " + path);
  return read_flows_csv(in);
}

std::vector<double> align_flows(const Network& network, const FlowsFile& flows) {
  std::vector<double> aligned(network.link_count(), 0.0);
  std::vector<char> seen(network.link_count(), 0);
  for (const FlowRecord& rec : flows.records) {
    const int li = network.link_index(rec.from, rec.to);
    if (li < 0)
      throw std::invalid_argument("flow row names unknown link " +
                                  std::to_string(rec.from) + "->" +
                                  std::to_string(rec.to));
    if (seen[li])
      throw std::invalid_argument("duplicate flow row for link " +
                                  std::to_string(rec.from) + "->" +
                                  std::to_string(rec.to));
    seen[li] = 1;
    aligned[li] = rec.flow;
  }
  for (int a = 0; a < network.link_count(); ++a) {
    if (!seen[a]) {
      const Link& link = network.link(a);
      throw std::invalid_argument("flows file is missing link " +
                                  std::to_string(link.from) + "->" +
                                  std::to_string(link.to));
    }
  }
  return aligned;
}

std::string manifest_to_json(const RunManifest& manifest) {
  ordered_json j;
  j["tool"] = kToolName;
  j["version"] = manifest.tool_version;
  j["rng"] = manifest.rng_id;
  j["network"] = manifest.network_path;
  j["demands"] = manifest.demands_path;
  j["out"] = manifest.out_path;
  j["trace"] = manifest.trace_path;
  j["solver"] = solver_name(manifest.config.kind);
  j["gamma"] = manifest.config.gamma.value;
  j["epsilon0"] = manifest.config.epsilon0;
  j["inner_iterations"] = manifest.config.inner_iterations;
  j["seed"] = manifest.config.seed;
  j["max_outer"] = manifest.config.max_outer;
  j["costs_from_latest_auxiliary"] = manifest.config.costs_from_latest_auxiliary;
  return j.dump(2) + "\n";
}

RunManifest manifest_from_json(const std::string& text) {
  try {
    const ordered_json j = ordered_json::parse(text);
    RunManifest m;
    m.tool_version = j.at("version").get<std::string>();
    m.rng_id = j.at("rng").get<std::string>();
    m.network_path = j.at("network").get<std::string>();
    m.demands_path = j.at("demands").get<std::string>();
    m.out_path = j.at("out").get<std::string>();
    m.trace_path = j.at("trace").get<std::string>();
    m.config.kind = solver_from_name(j.at("solver").get<std::string>());
    m.config.gamma.value = j.at("gamma").get<double>();
    m.config.epsilon0 = j.at("epsilon0").get<double>();
    m.config.inner_iterations = j.at("inner_iterations").get<int>();
    m.config.seed = j.at("seed").get<std::uint64_t>();
    m.config.max_outer = j.at("max_outer").get<int>();
    m.config.costs_from_latest_auxiliary = j.at("costs_from_latest_auxiliary").get<bool>();
    return m;
  } catch (const ordered_json::exception& e) {
    throw std::runtime_error(std::string("invalid manifest: ") + e.what());
  }
}

void write_manifest_file(const RunManifest& manifest, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open manifest for writing: " + path);
  out << manifest_to_json(manifest);
  if (!out) throw std::runtime_error("failed writing manifest: " + path);
}

RunManifest read_manifest_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open manifest: " + path);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return manifest_from_json(buffer.str());
}

TraceWriter::TraceWriter(std::ostream& out) : out_(&out) {
  *out_ << "outer_iter,epsilon,elapsed_ms,truncations\n";
}

void TraceWriter::record(const OuterIterationEvent& event) {
  *out_ << event.n << ',' << detail::shortest_double(event.epsilon) << ','
        << detail::fixed_double(event.elapsed_seconds * 1000.0, 3) << ','
        << event.truncations << '\n';
}

void export_dot(const Network& network, const std::vector<double>* flows,
                std::ostream& out, double min_visible_flow) {
  if (flows && flows->size() != static_cast<std::size_t>(network.link_count()))
    throw std::invalid_argument("flow vector does not match link count");

  double max_flow = 0.0;
  if (flows)
    for (double f : *flows) max_flow = std::max(max_flow, f);

  out << "digraph network {\n";
  out << "  rankdir=LR;\n";
  out << "  node [shape=circle, fontsize=10];\n";
  for (int node = 1; node <= network.node_count(); ++node)
    out << "  " << node << ";\n";
  for (int a = 0; a < network.link_count(); ++a) {
    const Link& link = network.link(a);
    out << "  " << link.from << " -> " << link.to << " [label=\""
        << detail::shortest_double(link.alpha) << '/' << detail::shortest_double(link.beta);
    if (flows) {
      const double flow = (*flows)[a];
      out << "\\n" << detail::fixed_double(flow, 4);
      out << "\"";
      if (flow < min_visible_flow) {
        out << ", style=dashed, penwidth=0.5";
      } else {
        const double width = max_flow > 0.0 ? 0.5 + 4.5 * flow / max_flow : 1.0;
        out << ", penwidth=" << detail::fixed_double(width, 2);
      }
    } else {
      out << "\"";
    }
    out << "];\n";
  }
  out << "}\n";
}

}  // namespace physue
