#include "rve/config.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <fstream>
#include <istream>
#include <sstream>

#include <fmt/format.h>

#include "rve/errors.hpp"

namespace rve {

namespace {

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return std::string(s.substr(first, last - first + 1));
}

std::vector<std::string> words(const std::string& s) {
  std::istringstream in(s);
  std::vector<std::string> out;
  for (std::string w; in >> w;) out.push_back(w);
  return out;
}

double parse_double(const std::string& key, const std::string& text) {
  const std::string t = trim(text);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (ec != std::errc() || ptr != t.data() + t.size() || t.empty()) {
    throw ConfigError(fmt::format("{}: expected a number, got '{}'", key, text));
  }
  return v;
}

long long parse_int(const std::string& key, const std::string& text) {
  const std::string t = trim(text);
  long long v = 0;
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (ec != std::errc() || ptr != t.data() + t.size() || t.empty()) {
    throw ConfigError(fmt::format("{}: expected an integer, got '{}'", key, text));
  }
  return v;
}

template <typename Enum>
Enum parse_choice(const std::string& key, const std::string& text,
                  std::initializer_list<std::pair<const char*, Enum>> choices) {
  const std::string t = trim(text);
  std::string allowed;
  for (const auto& [name, value] : choices) {
    if (t == name) return value;
    allowed += allowed.empty() ? name : fmt::format("|{}", name);
  }
  throw ConfigError(fmt::format("{}: expected {}, got '{}'", key, allowed, text));
}

}  // namespace

const std::vector<std::pair<std::string, std::string>>& config_keys() {
  static const std::vector<std::pair<std::string, std::string>> keys{
      {"rve.dim", "2 or 3 (required)"},
      {"rve.width_x", "cell width along x in mm (required)"},
      {"rve.width_y", "cell width along y in mm (required)"},
      {"rve.width_z", "cell width along z in mm (required in 3D)"},
      {"rve.volume_fraction", "fibre volume fraction in (0, pi/4) for a square section (required)"},
      {"rve.fiber_axis", "x|y|z, fibre direction in 3D (default z)"},
      {"rve.plane", "stress|strain, 2D plane assumption (default stress)"},
      {"mesh.divisions", "N, or one count per axis 'Nx Ny [Nz]' (required)"},
      {"fiber.young_modulus", "GPa (required)"},
      {"fiber.poisson_ratio", "(required)"},
      {"matrix.young_modulus", "GPa (required)"},
      {"matrix.poisson_ratio", "(required)"},
      {"load.strain", "applied strain magnitude (default 1e-4)"},
      {"analysis.mode", "stress|energy|both (default stress)"},
      {"solver.kind", "cg|direct (default cg)"},
      {"solver.tolerance", "relative residual (default 1e-10)"},
      {"solver.max_iterations", "0 = 20 x system size (default 0)"},
      {"output.format", "json|csv (default json)"},
      {"output.path", "output file, '-' for stdout (default -)"},
      {"output.vtk_dir", "directory for per-case VTK files (default none)"},
      {"output.verbosity", "0, 1 or 2 (default 0)"},
  };
  return keys;
}

KeyValues read_key_values(std::istream& in, const std::string& source) {
  KeyValues out;
  std::string section;
  std::string line;
  int number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    const std::string t = trim(line);
    if (t.empty()) continue;
    if (t.front() == '[') {
      if (t.back() != ']') throw ConfigError(fmt::format("{}:{}: malformed section header", source, number));
      section = trim(std::string_view(t).substr(1, t.size() - 2));
      continue;
    }
    const auto eq = t.find('=');
    if (eq == std::string::npos) {
      throw ConfigError(fmt::format("{}:{}: expected 'key = value', got '{}'", source, number, t));
    }
    std::string key = trim(std::string_view(t).substr(0, eq));
    if (key.empty()) throw ConfigError(fmt::format("{}:{}: empty key", source, number));
    if (!section.empty()) key = section + "." + key;
    if (out.contains(key)) throw ConfigError(fmt::format("{}:{}: duplicate key '{}'", source, number, key));
    out[key] = trim(std::string_view(t).substr(eq + 1));
  }
  return out;
}

KeyValues read_key_values(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(fmt::format("cannot open config file '{}'", path.string()));
  return read_key_values(in, path.string());
}

std::pair<std::string, std::string> split_assignment(const std::string& text) {
  const auto eq = text.find('=');
  if (eq == std::string::npos || eq == 0) {
    throw ConfigError(fmt::format("expected key=value, got '{}'", text));
  }
  return {trim(std::string_view(text).substr(0, eq)), trim(std::string_view(text).substr(eq + 1))};
}

RunConfig parse_config(const KeyValues& values) {
  for (const auto& [key, value] : values) {
    const auto& known = config_keys();
    const bool ok = std::any_of(known.begin(), known.end(), [&](const auto& k) { return k.first == key; });
    if (!ok) throw ConfigError(fmt::format("unknown key '{}'", key));
  }

  auto get = [&](const std::string& key) -> const std::string* {
    const auto it = values.find(key);
    return it == values.end() ? nullptr : &it->second;
  };

  RunConfig cfg;
  RveSpec& spec = cfg.spec;

  std::vector<std::string> missing;
  const std::string* dim = get("rve.dim");
  if (dim != nullptr) {
    const long long d = parse_int("rve.dim", *dim);
    if (d != 2 && d != 3) throw ConfigError(fmt::format("rve.dim: must be 2 or 3, got {}", d));
    spec.dim = static_cast<int>(d);
  } else {
    missing.push_back("rve.dim");
  }
  std::vector<std::string> required{"rve.width_x",          "rve.width_y",         "rve.volume_fraction",
                                    "mesh.divisions",       "fiber.young_modulus", "fiber.poisson_ratio",
                                    "matrix.young_modulus", "matrix.poisson_ratio"};
  if (dim == nullptr || spec.dim == 3) required.insert(required.begin() + 2, "rve.width_z");
  for (const auto& key : required) {
    if (get(key) == nullptr) missing.push_back(key);
  }
  if (!missing.empty()) {
    std::string list;
    for (const auto& k : missing) list += list.empty() ? k : ", " + k;
    throw ConfigError(fmt::format("missing required keys: {}", list));
  }

  spec.widths[0] = parse_double("rve.width_x", *get("rve.width_x"));
  spec.widths[1] = parse_double("rve.width_y", *get("rve.width_y"));
  spec.widths[2] = spec.dim == 3 ? parse_double("rve.width_z", *get("rve.width_z")) : 0.0;
  if (spec.dim == 2 && get("rve.width_z") != nullptr) {
    spec.widths[2] = parse_double("rve.width_z", *get("rve.width_z"));
  }
  spec.fiber_volume_fraction = parse_double("rve.volume_fraction", *get("rve.volume_fraction"));
  if (const auto* v = get("rve.fiber_axis")) {
    spec.fiber_axis = parse_choice<int>("rve.fiber_axis", *v, {{"x", 0}, {"y", 1}, {"z", 2}});
  }
  if (const auto* v = get("rve.plane")) {
    spec.plane = parse_choice<PlaneAssumption>("rve.plane", *v,
                                               {{"stress", PlaneAssumption::stress},
                                                {"strain", PlaneAssumption::strain}});
  }

  const auto div_words = words(*get("mesh.divisions"));
  if (div_words.size() == 1) {
    const long long n = parse_int("mesh.divisions", div_words[0]);
    spec.divisions = {static_cast<int>(n), static_cast<int>(n), spec.dim == 3 ? static_cast<int>(n) : 0};
  } else if (static_cast<int>(div_words.size()) == spec.dim) {
    spec.divisions = {0, 0, 0};
    for (int a = 0; a < spec.dim; ++a) spec.divisions[a] = static_cast<int>(parse_int("mesh.divisions", div_words[a]));
  } else {
    throw ConfigError(fmt::format("mesh.divisions: expected 1 or {} integers, got '{}'", spec.dim,
                                  *get("mesh.divisions")));
  }

  spec.fiber.young_modulus = parse_double("fiber.young_modulus", *get("fiber.young_modulus"));
  spec.fiber.poisson_ratio = parse_double("fiber.poisson_ratio", *get("fiber.poisson_ratio"));
  spec.matrix.young_modulus = parse_double("matrix.young_modulus", *get("matrix.young_modulus"));
  spec.matrix.poisson_ratio = parse_double("matrix.poisson_ratio", *get("matrix.poisson_ratio"));
  if (const auto* v = get("load.strain")) spec.applied_strain = parse_double("load.strain", *v);

  if (const auto* v = get("analysis.mode")) {
    cfg.pipeline.mode = parse_choice<ExtractionMode>(
        "analysis.mode", *v,
        {{"stress", ExtractionMode::stress}, {"energy", ExtractionMode::energy}, {"both", ExtractionMode::both}});
  }
  if (const auto* v = get("solver.kind")) {
    cfg.pipeline.solver.kind =
        parse_choice<SolverKind>("solver.kind", *v, {{"cg", SolverKind::cg}, {"direct", SolverKind::direct}});
  }
  if (const auto* v = get("solver.tolerance")) {
    cfg.pipeline.solver.tolerance = parse_double("solver.tolerance", *v);
    if (!(cfg.pipeline.solver.tolerance > 0.0 && cfg.pipeline.solver.tolerance < 1.0)) {
      throw ConfigError(fmt::format("solver.tolerance: must lie in (0, 1), got {}", *v));
    }
  }
  if (const auto* v = get("solver.max_iterations")) {
    cfg.pipeline.solver.max_iterations = parse_int("solver.max_iterations", *v);
    if (cfg.pipeline.solver.max_iterations < 0) {
      throw ConfigError(fmt::format("solver.max_iterations: must be non-negative, got {}", *v));
    }
  }
  if (const auto* v = get("output.format")) {
    cfg.format = parse_choice<OutputFormat>("output.format", *v,
                                            {{"json", OutputFormat::json}, {"csv", OutputFormat::csv}});
  }
  if (const auto* v = get("output.path")) cfg.output_path = trim(*v);
  if (const auto* v = get("output.vtk_dir")) cfg.vtk_dir = trim(*v);
  if (const auto* v = get("output.verbosity")) {
    cfg.verbosity = static_cast<int>(parse_int("output.verbosity", *v));
  }

  // Invariant checks, reported against the key that carries the value.
  static constexpr std::array<const char*, 3> kWidthKeys{"rve.width_x", "rve.width_y", "rve.width_z"};
  for (int a = 0; a < spec.dim; ++a) {
    if (!(spec.widths[a] > 0.0)) {
      throw ConfigError(fmt::format("{}: must be positive, got {}", kWidthKeys[a], spec.widths[a]));
    }
    if (spec.divisions[a] < 2) {
      throw ConfigError(fmt::format("mesh.divisions: need at least 2 per axis, got {}", spec.divisions[a]));
    }
  }
  auto check = [](const char* key, auto&& fn) {
    try {
      fn();
    } catch (const ConfigError& e) {
      throw ConfigError(fmt::format("{}: {}", key, e.what()));
    }
  };
  check("rve.volume_fraction", [&] { (void)spec.fiber_radius(); });
  spec.fiber.validate("fiber");
  spec.matrix.validate("matrix");
  if (!(spec.applied_strain > 0.0)) {
    throw ConfigError(fmt::format("load.strain: must be positive, got {}", spec.applied_strain));
  }
  spec.validate();
  return cfg;
}

}  // namespace rve
