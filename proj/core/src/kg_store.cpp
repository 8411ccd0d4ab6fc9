#include "kgrag/kg_store.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "kgrag/errors.hpp"
#include "kgrag/text.hpp"

namespace kgrag {

std::optional<std::string> triple_violation(std::string_view subject,
                                            std::string_view predicate,
                                            std::string_view object) {
  for (std::string_view field : {subject, predicate, object}) {
    if (field.find_first_of("\t\n\r") != std::string_view::npos)
      return "field contains tab or newline";
    if (trim(field).empty()) return "empty field";
  }
  return std::nullopt;
}

Triple make_triple(std::string_view subject, std::string_view predicate,
                   std::string_view object) {
  if (auto reason = triple_violation(subject, predicate, object))
    throw InvalidTriple(*reason);
  return Triple{std::string(trim(subject)), std::string(trim(predicate)),
                std::string(trim(object))};
}

CanonicalTriple canonical_triple(const Triple& t) {
  return {canonicalize(t.subject), canonicalize(t.predicate), canonicalize(t.object)};
}

EntityId KnowledgeGraph::intern(const std::string& surface) {
  std::string canonical = canonicalize(surface);
  auto it = entity_index_.find(canonical);
  if (it != entity_index_.end()) return it->second;
  EntityId id{static_cast<std::uint32_t>(canonical_names_.size())};
  entity_index_.emplace(canonical, id);
  canonical_names_.push_back(std::move(canonical));
  display_names_.push_back(surface);
  forward_adj_.emplace_back();
  reverse_adj_.emplace_back();
  return id;
}

KnowledgeGraph KnowledgeGraph::from_triples(std::span<const Triple> triples,
                                            std::size_t* duplicates) {
  KnowledgeGraph g;
  std::size_t dropped = 0;
  for (const Triple& raw : triples) {
    Triple t = make_triple(raw.subject, raw.predicate, raw.object);
    CanonicalTriple key = canonical_triple(t);
    if (g.triple_lookup_.contains(key)) {
      ++dropped;
      continue;
    }
    const std::size_t index = g.triples_.size();
    const EntityId s = g.intern(t.subject);
    const EntityId o = g.intern(t.object);
    g.forward_adj_[s.value].push_back(Edge{index, o});
    g.reverse_adj_[o.value].push_back(Edge{index, s});
    g.canonical_predicates_.push_back(std::get<1>(key));
    g.ends_.emplace_back(s, o);
    g.triple_lookup_.emplace(std::move(key), index);
    g.triples_.push_back(std::move(t));
  }
  if (duplicates) *duplicates = dropped;
  return g;
}

KnowledgeGraph KnowledgeGraph::parse_tsv(std::string_view text,
                                         const LoadOptions& options,
                                         LoadStats* stats) {
  LoadStats local;
  std::vector<Triple> parsed;
  std::size_t line_number = 0;
  for (std::string_view line : split_lines(text)) {
    ++line_number;
    ++local.lines;
    if (trim(line).empty()) {
      ++local.blank;
      continue;
    }
    auto fields = split(line, '\t');
    const bool ok = fields.size() == 3 &&
                    !triple_violation(fields[0], fields[1], fields[2]).has_value();
    if (!ok) {
      if (options.strict) throw MalformedLine(line_number, std::string(line));
      ++local.malformed;
      local.malformed_lines.push_back(line_number);
      continue;
    }
    parsed.push_back(make_triple(fields[0], fields[1], fields[2]));
  }
  KnowledgeGraph g = from_triples(parsed, &local.duplicates);
  if (stats) *stats = std::move(local);
  return g;
}

KnowledgeGraph KnowledgeGraph::load_tsv(const std::filesystem::path& path,
                                        const LoadOptions& options,
                                        LoadStats* stats) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  if (in.bad()) throw IoError("error reading " + path.string());
  return parse_tsv(buffer.str(), options, stats);
}

void KnowledgeGraph::check(EntityId id) const {
  if (id.value >= canonical_names_.size())
    throw UnknownEntity("entity id " + std::to_string(id.value) + " out of range");
}

const std::string& KnowledgeGraph::canonical_name(EntityId id) const {
  check(id);
  return canonical_names_[id.value];
}

const std::string& KnowledgeGraph::display_name(EntityId id) const {
  check(id);
  return display_names_[id.value];
}

std::span<const Edge> KnowledgeGraph::out_edges(EntityId id) const {
  check(id);
  return forward_adj_[id.value];
}

std::span<const Edge> KnowledgeGraph::in_edges(EntityId id) const {
  check(id);
  return reverse_adj_[id.value];
}

std::vector<Neighbor> KnowledgeGraph::neighbors(EntityId id, Direction direction) const {
  check(id);
  std::vector<Neighbor> out;
  auto add = [&](const std::vector<Edge>& edges) {
    for (const Edge& e : edges) {
      Neighbor n{canonical_predicates_[e.triple], e.other};
      if (std::find(out.begin(), out.end(), n) == out.end()) out.push_back(std::move(n));
    }
  };
  if (direction != Direction::in) add(forward_adj_[id.value]);
  if (direction != Direction::out) add(reverse_adj_[id.value]);
  return out;
}

std::vector<std::size_t> KnowledgeGraph::incident_triples(EntityId id) const {
  check(id);
  std::vector<std::size_t> out;
  for (const Edge& e : forward_adj_[id.value]) out.push_back(e.triple);
  for (const Edge& e : reverse_adj_[id.value]) out.push_back(e.triple);
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

std::optional<EntityId> KnowledgeGraph::resolve(std::string_view name) const {
  auto it = entity_index_.find(canonicalize(name));
  if (it == entity_index_.end()) return std::nullopt;
  return it->second;
}

std::optional<std::size_t> KnowledgeGraph::find(const Triple& t) const {
  auto it = triple_lookup_.find(canonical_triple(t));
  if (it == triple_lookup_.end()) return std::nullopt;
  return it->second;
}

bool KnowledgeGraph::contains(const Triple& t) const { return find(t).has_value(); }

std::string KnowledgeGraph::to_tsv() const {
  std::string out;
  for (const Triple& t : triples_) {
    out += t.subject;
    out += '\t';
    out += t.predicate;
    out += '\t';
    out += t.object;
    out += '\n';
  }
  return out;
}

void KnowledgeGraph::write_tsv(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out << to_tsv();
  if (!out) throw IoError("error writing " + path.string());
}

}  // namespace kgrag
