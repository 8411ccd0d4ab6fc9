#include "kgrag/templates.hpp"

#include <fstream>
#include <sstream>

#include "kgrag/errors.hpp"
#include "kgrag/text.hpp"

namespace kgrag {
namespace detail {
const std::map<std::string, std::string>& builtin_templates();
}  // namespace detail

namespace {

bool mentions_absent(std::string_view line, const TemplateVars& vars) {
  for (const auto& [name, value] : vars) {
    if (value) continue;
    if (line.find("{" + name + "}") != std::string_view::npos) return true;
  }
  return false;
}

}  // namespace

std::string render_template(std::string_view text, const TemplateVars& vars) {
  std::string kept;
  kept.reserve(text.size());
  std::size_t start = 0;
  while (start <= text.size()) {
    std::size_t end = text.find('\n', start);
    const bool last = end == std::string_view::npos;
    std::string_view line = text.substr(start, last ? std::string_view::npos : end - start);
    if (!mentions_absent(line, vars)) {
      kept.append(line);
      if (!last) kept.push_back('\n');
    }
    if (last) break;
    start = end + 1;
  }

  std::string out;
  out.reserve(kept.size());
  for (std::size_t i = 0; i < kept.size();) {
    if (kept[i] == '{') {
      const std::size_t close = kept.find('}', i + 1);
      if (close != std::string::npos) {
        auto it = vars.find(kept.substr(i + 1, close - i - 1));
        if (it != vars.end() && it->second) {
          out += *it->second;
          i = close + 1;
          continue;
        }
      }
    }
    out.push_back(kept[i]);
    ++i;
  }
  return out;
}

TemplateStore TemplateStore::builtin() {
  TemplateStore store;
  for (const auto& [id, text] : detail::builtin_templates()) store.set(id, text);
  return store;
}

TemplateStore TemplateStore::from_directory(const std::filesystem::path& dir) {
  TemplateStore store = builtin();
  std::error_code ec;
  if (!std::filesystem::is_directory(dir, ec))
    throw IoError("template directory not found: " + dir.string());
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (!entry.is_regular_file() || entry.path().extension() != ".txt") continue;
    std::ifstream in(entry.path(), std::ios::binary);
    if (!in) throw IoError("cannot read " + entry.path().string());
    std::ostringstream buffer;
    buffer << in.rdbuf();
    std::string text = buffer.str();
    if (!text.empty() && text.back() == '\n') text.pop_back();
    store.set(entry.path().stem().string(), std::move(text));
  }
  return store;
}

bool TemplateStore::contains(std::string_view id) const {
  return templates_.find(id) != templates_.end();
}

const std::string& TemplateStore::text(std::string_view id) const {
  auto it = templates_.find(id);
  if (it == templates_.end()) throw TemplateError("unknown template: " + std::string(id));
  return it->second;
}

std::string TemplateStore::render(std::string_view id, const TemplateVars& vars) const {
  return render_template(text(id), vars);
}

std::vector<std::string> TemplateStore::ids() const {
  std::vector<std::string> out;
  for (const auto& [id, _] : templates_) out.push_back(id);
  return out;
}

void TemplateStore::set(std::string id, std::string text) {
  templates_.insert_or_assign(std::move(id), std::move(text));
}

}  // namespace kgrag
