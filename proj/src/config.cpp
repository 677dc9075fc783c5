#include "ipva/config.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include "ipva/error.hpp"

namespace ipva {

const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kConfig: return "ConfigError";
    case ErrorKind::kConstraintViolation: return "ConstraintViolation";
    case ErrorKind::kIndexOutOfRange: return "IndexOutOfRange";
    case ErrorKind::kLinearSolveFailure: return "LinearSolveFailure";
    case ErrorKind::kNonFiniteState: return "NonFiniteState";
    case ErrorKind::kEmptyTrajectory: return "EmptyTrajectory";
    case ErrorKind::kTooShort: return "TooShort";
    case ErrorKind::kDivisionByZero: return "DivisionByZero";
    case ErrorKind::kNotConverged: return "NotConverged";
    case ErrorKind::kSingularInertia: return "SingularInertia";
    case ErrorKind::kSolverStalled: return "SolverStalled";
    case ErrorKind::kInfeasible: return "Infeasible";
    case ErrorKind::kDegenerateInversion: return "DegenerateInversion";
  }
  return "Error";
}

namespace {

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

double parse_double(const std::string& key, const std::string& text) {
  double value = 0.0;
  const auto* begin = text.data();
  const auto* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(begin, end, value);
  if (ec != std::errc() || ptr != end) {
    throw Error(ErrorKind::kConfig,
                "key '" + key + "': expected a number, got '" + text + "'");
  }
  return value;
}

}  // namespace

KeyValueConfig KeyValueConfig::parse(const std::string& text,
                                     const std::string& origin) {
  KeyValueConfig cfg;
  cfg.origin_ = origin;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) {
      line.erase(hash);
    }
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw Error(ErrorKind::kConfig, origin + ":" + std::to_string(lineno) +
                                          ": expected 'key = value'");
    }
    const auto key = trim(line.substr(0, eq));
    if (key.empty()) {
      throw Error(ErrorKind::kConfig,
                  origin + ":" + std::to_string(lineno) + ": empty key");
    }
    cfg.set(key, trim(line.substr(eq + 1)));
  }
  return cfg;
}

KeyValueConfig KeyValueConfig::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::kConfig, "cannot open config '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse(buf.str(), path);
}

void KeyValueConfig::set(const std::string& key, const std::string& value) {
  entries_[key] = value;
  touched_.try_emplace(key, false);
}

bool KeyValueConfig::has(const std::string& key) const {
  return entries_.count(key) != 0;
}

std::optional<std::string> KeyValueConfig::get(const std::string& key) const {
  auto it = entries_.find(key);
  if (it == entries_.end()) return std::nullopt;
  touched_[key] = true;
  return it->second;
}

std::string KeyValueConfig::get_string(const std::string& key,
                                       const std::string& fallback) const {
  return get(key).value_or(fallback);
}

double KeyValueConfig::get_double(const std::string& key,
                                  double fallback) const {
  auto v = get(key);
  return v ? parse_double(key, *v) : fallback;
}

long KeyValueConfig::get_int(const std::string& key, long fallback) const {
  auto v = get(key);
  if (!v) return fallback;
  long value = 0;
  auto [ptr, ec] = std::from_chars(v->data(), v->data() + v->size(), value);
  if (ec != std::errc() || ptr != v->data() + v->size()) {
    throw Error(ErrorKind::kConfig,
                "key '" + key + "': expected an integer, got '" + *v + "'");
  }
  return value;
}

bool KeyValueConfig::get_bool(const std::string& key, bool fallback) const {
  auto v = get(key);
  if (!v) return fallback;
  if (*v == "true" || *v == "1" || *v == "yes" || *v == "on") return true;
  if (*v == "false" || *v == "0" || *v == "no" || *v == "off") return false;
  throw Error(ErrorKind::kConfig,
              "key '" + key + "': expected a boolean, got '" + *v + "'");
}

std::vector<double> KeyValueConfig::get_list(
    const std::string& key, const std::vector<double>& fallback) const {
  auto v = get(key);
  if (!v) return fallback;
  std::vector<double> out;
  if (const auto colon = v->find(':'); colon != std::string::npos) {
    const long lo = static_cast<long>(parse_double(key, trim(v->substr(0, colon))));
    const long hi = static_cast<long>(parse_double(key, trim(v->substr(colon + 1))));
    if (hi < lo) {
      throw Error(ErrorKind::kConfig, "key '" + key + "': empty range " + *v);
    }
    for (long i = lo; i <= hi; ++i) out.push_back(static_cast<double>(i));
    return out;
  }
  std::istringstream in(*v);
  std::string item;
  while (std::getline(in, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(parse_double(key, item));
  }
  return out;
}

std::vector<std::string> KeyValueConfig::unused_keys() const {
  std::vector<std::string> out;
  for (const auto& [key, used] : touched_) {
    if (!used) out.push_back(key);
  }
  return out;
}

std::string KeyValueConfig::serialize() const {
  std::string out;
  for (const auto& [key, value] : entries_) {
    out += key + " = " + value + "\n";
  }
  return out;
}

}  // namespace ipva
