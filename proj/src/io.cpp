#include "thermoform/io.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <sstream>

namespace thermoform::io {

namespace {

std::string child_path(const std::string& base, const std::string& key) { return base.empty() ? key : base + "." + key; }

Eigen::MatrixXd parse_matrix(const Field& f, std::size_t n) {
  f.require_array();
  if (f.size() != n) f.fail("expected " + std::to_string(n) + " rows, got " + std::to_string(f.size()));
  Eigen::MatrixXd m(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto row = f.at(i).as_doubles();
    if (row.size() != n) f.at(i).fail("expected " + std::to_string(n) + " entries");
    for (std::size_t j = 0; j < n; ++j) m(i, j) = row[j];
  }
  return m;
}

}  // namespace

bool Field::has(const std::string& key) const { return value_->is_object() && value_->contains(key); }

Field Field::at(const std::string& key) const {
  require_object();
  const auto it = value_->find(key);
  if (it == value_->end()) fail("missing required field \"" + key + "\"");
  return Field(*it, child_path(path_, key));
}

std::optional<Field> Field::find(const std::string& key) const {
  require_object();
  const auto it = value_->find(key);
  if (it == value_->end()) return std::nullopt;
  return Field(*it, child_path(path_, key));
}

Field Field::at(std::size_t i) const {
  require_array();
  if (i >= value_->size()) fail("index " + std::to_string(i) + " out of range");
  return Field((*value_)[i], path_ + "[" + std::to_string(i) + "]");
}

std::size_t Field::size() const { return value_->size(); }

void Field::fail(const std::string& message) const { throw ValidationError((path_.empty() ? "config" : path_) + ": " + message); }

void Field::require_object() const {
  if (!value_->is_object()) fail("expected an object");
}

void Field::require_array() const {
  if (!value_->is_array()) fail("expected an array");
}

void Field::allow_only(std::initializer_list<const char*> allowed) const {
  require_object();
  for (const auto& [key, _] : value_->items()) {
    bool ok = false;
    for (const char* a : allowed) ok = ok || key == a;
    if (!ok) at(key).fail("unknown field");
  }
}

double Field::as_double() const {
  if (!value_->is_number()) fail("expected a number");
  const double v = value_->get<double>();
  if (!std::isfinite(v)) fail("expected a finite number");
  return v;
}

long long Field::as_int() const {
  if (value_->is_number_integer()) return value_->get<long long>();
  if (value_->is_number_float()) {
    const double v = value_->get<double>();
    if (std::isfinite(v) && v == std::floor(v) && std::abs(v) < 9e15) return static_cast<long long>(v);
  }
  fail("expected an integer");
}

int Field::as_int_in(long long lo, long long hi) const {
  const long long v = as_int();
  if (v < lo || v > hi) fail("must be in [" + std::to_string(lo) + ", " + std::to_string(hi) + "], got " + std::to_string(v));
  return static_cast<int>(v);
}

bool Field::as_bool() const {
  if (!value_->is_boolean()) fail("expected true or false");
  return value_->get<bool>();
}

std::string Field::as_string() const {
  if (!value_->is_string()) fail("expected a string");
  return value_->get<std::string>();
}

std::vector<double> Field::as_doubles() const {
  require_array();
  std::vector<double> out;
  for (std::size_t i = 0; i < size(); ++i) out.push_back(at(i).as_double());
  return out;
}

std::vector<int> Field::as_ints_in(long long lo, long long hi) const {
  require_array();
  if (size() == 0) fail("expected a non-empty array");
  std::vector<int> out;
  for (std::size_t i = 0; i < size(); ++i) out.push_back(at(i).as_int_in(lo, hi));
  return out;
}

Json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError(path.string() + ": cannot open file");
  try {
    return Json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ValidationError(path.string() + ": invalid JSON (" + e.what() + ")");
  }
}

ShiftSpace parse_space(const Field& f) {
  f.allow_only({"k", "matrix", "dimension"});
  const int k = f.at("k").as_int_in(1, kMaxPrintableAlphabet);
  const int dim = f.has("dimension") ? f.at("dimension").as_int_in(1, 2) : 1;
  if (dim == 2) {
    if (f.has("matrix")) f.at("matrix").fail("2-D spaces are full shifts; omit the matrix");
    return ShiftSpace::full(k, 2);
  }
  if (!f.has("matrix")) return ShiftSpace::full(k, 1);
  const Field m = f.at("matrix");
  m.require_array();
  std::vector<std::vector<int>> a;
  for (std::size_t i = 0; i < m.size(); ++i) {
    const Field row = m.at(i);
    row.require_array();
    std::vector<int> r;
    for (std::size_t j = 0; j < row.size(); ++j) {
      const long long v = row.at(j).as_int();
      if (v != 0 && v != 1) row.at(j).fail("entries must be 0 or 1");
      r.push_back(static_cast<int>(v));
    }
    a.push_back(std::move(r));
  }
  return with_path(m, [&] { return ShiftSpace::sft(k, a); });
}

Limits parse_limits(const Field& f) {
  f.allow_only({"enumeration_cap", "box_budget", "max_strip_width"});
  Limits l;
  if (auto v = f.find("enumeration_cap")) l.enumeration_cap = static_cast<std::uint64_t>(v->as_int_in(1, 1LL << 30));
  if (auto v = f.find("box_budget")) l.box_budget = static_cast<std::uint64_t>(v->as_int_in(1, 1LL << 30));
  if (auto v = f.find("max_strip_width")) l.max_strip_width = v->as_int_in(2, 12);
  return l;
}

Potential parse_potential(const ShiftSpace& space, const Field& f, const Limits& limits) {
  f.require_object();
  if (f.has("values")) {
    f.allow_only({"window", "values"});
    const int window = f.at("window").as_int_in(1, 64);
    const Field values = f.at("values");
    values.require_object();
    std::map<std::string, double> table;
    for (const auto& [word, _] : values.json().items()) table[word] = values.at(word).as_double();
    return with_path(values, [&] { return Potential::from_values(space, window, table, limits); });
  }
  if (f.has("constant")) {
    f.allow_only({"constant", "window"});
    const int window = f.has("window") ? f.at("window").as_int_in(1, 64) : 1;
    return with_path(f, [&] { return Potential::constant(space, window, f.at("constant").as_double(), limits); });
  }
  if (f.has("indicator")) {
    f.allow_only({"indicator", "scale"});
    const Field w = f.at("indicator");
    const double scale = f.has("scale") ? f.at("scale").as_double() : 1.0;
    Potential p = with_path(w, [&] { return Potential::indicator(space, Word::parse(w.as_string()), limits); });
    return scale * std::move(p);
  }
  if (f.has("zero")) {
    f.allow_only({"zero"});
    return with_path(f, [&] { return Potential::zero(space, f.at("zero").as_int_in(1, 64), limits); });
  }
  f.fail("potential needs one of \"values\", \"constant\", \"indicator\" or \"zero\"");
}

ObservableFamily parse_observables(const ShiftSpace& space, const Field& f, const Limits& limits) {
  if (f.json().is_object()) {
    f.allow_only({"cylinders"});
    const int n = f.at("cylinders").as_int_in(1, 32);
    return with_path(f, [&] { return cylinder_family(space, n, limits); });
  }
  f.require_array();
  if (f.size() == 0) f.fail("expected at least one observable");
  std::vector<Potential> members;
  for (std::size_t i = 0; i < f.size(); ++i) members.push_back(parse_potential(space, f.at(i), limits));
  return with_path(f, [&] { return ObservableFamily(std::move(members), limits); });
}

InvariantMeasure parse_measure(const ShiftSpace& space, const Field& f, const Limits& limits) {
  f.require_object();
  if (f.has("mix")) {
    f.allow_only({"mix"});
    const Field parts = f.at("mix");
    parts.require_array();
    std::vector<std::pair<double, InvariantMeasure>> list;
    for (std::size_t i = 0; i < parts.size(); ++i) {
      const Field p = parts.at(i);
      p.allow_only({"weight", "measure"});
      list.emplace_back(p.at("weight").as_double(), parse_measure(space, p.at("measure"), limits));
    }
    return with_path(parts, [&] { return mix(list); });
  }
  if (f.has("equilibrium")) {
    f.allow_only({"equilibrium"});
    const Potential pot = parse_potential(space, f.at("equilibrium"), limits);
    if (!space.is_primitive()) f.at("equilibrium").fail("uniqueness premise fails: space is not primitive");
    return equilibrium_state(space, pot, limits);
  }
  if (f.has("periodic_orbit")) {
    f.allow_only({"periodic_orbit"});
    const Field w = f.at("periodic_orbit");
    return with_path(w, [&] { return MarkovMeasure::periodic_orbit(space, Word::parse(w.as_string()), limits); });
  }
  if (f.has("bernoulli")) {
    f.allow_only({"bernoulli"});
    const Field p = f.at("bernoulli");
    return with_path(p, [&] { return MarkovMeasure::bernoulli(space, p.as_doubles()); });
  }
  f.allow_only({"components"});
  const Field comps = f.at("components");
  comps.require_array();
  if (comps.size() == 0) comps.fail("expected at least one component");
  std::vector<InvariantMeasure::Component> out;
  for (std::size_t i = 0; i < comps.size(); ++i) {
    const Field c = comps.at(i);
    c.allow_only({"weight", "order", "transition", "stationary"});
    const double weight = c.has("weight") ? c.at("weight").as_double() : 1.0;
    const int order = c.at("order").as_int_in(1, 16);
    const std::uint64_t states = count_admissible_words(space, order);
    if (states > 4096) c.at("order").fail("too many states (" + std::to_string(states) + ")");
    const Eigen::MatrixXd q = parse_matrix(c.at("transition"), states);
    if (c.has("stationary")) {
      const auto pi = c.at("stationary").as_doubles();
      if (pi.size() != states) c.at("stationary").fail("expected " + std::to_string(states) + " entries");
      const Eigen::VectorXd piv = Eigen::Map<const Eigen::VectorXd>(pi.data(), static_cast<Eigen::Index>(pi.size()));
      out.push_back({weight, with_path(c, [&] { return MarkovMeasure::with_stationary(space, order, q, piv, limits); })});
    } else {
      out.push_back({weight, with_path(c, [&] { return MarkovMeasure::from_transition(space, order, q, limits); })});
    }
  }
  return with_path(comps, [&] { return InvariantMeasure(std::move(out)); });
}

BoxQuery parse_box(const Field& f) {
  f.allow_only({"lo", "hi", "lo_closed", "hi_closed"});
  BoxQuery b;
  b.lo = f.at("lo").as_doubles();
  b.hi = f.at("hi").as_doubles();
  auto flags = [&](const char* key) {
    std::vector<bool> out(b.lo.size(), true);
    if (auto v = f.find(key)) {
      v->require_array();
      if (v->size() != b.lo.size()) v->fail("expected " + std::to_string(b.lo.size()) + " flags");
      for (std::size_t i = 0; i < v->size(); ++i) out[i] = v->at(i).as_bool();
    }
    return out;
  };
  b.lo_closed = flags("lo_closed");
  b.hi_closed = flags("hi_closed");
  with_path(f, [&] { b.validate(); });
  return b;
}

PairInteraction parse_interaction(int k, const Field& f) {
  f.require_object();
  if (f.has("potts")) {
    f.allow_only({"potts"});
    return PairInteraction::potts(k, f.at("potts").as_double());
  }
  f.allow_only({"values"});
  const Eigen::MatrixXd m = parse_matrix(f.at("values"), static_cast<std::size_t>(k));
  std::vector<double> v;
  for (int a = 0; a < k; ++a)
    for (int b = 0; b < k; ++b) v.push_back(m(a, b));
  return PairInteraction(k, std::move(v));
}

DualOptions parse_dual(const Field& f) {
  f.allow_only({"gradient_tolerance", "divergence_bound", "max_iterations"});
  DualOptions d;
  if (auto v = f.find("gradient_tolerance")) {
    d.gradient_tolerance = v->as_double();
    if (!(d.gradient_tolerance >= 1e-14 && d.gradient_tolerance <= 1e-2)) v->fail("must be in [1e-14, 1e-2]");
  }
  if (auto v = f.find("divergence_bound")) {
    d.divergence_bound = v->as_double();
    if (!(d.divergence_bound >= 1.0 && d.divergence_bound <= 1e6)) v->fail("must be in [1, 1e6]");
  }
  if (auto v = f.find("max_iterations")) d.max_iterations = v->as_int_in(1, 100000);
  return d;
}

double round12(double x) {
  if (!std::isfinite(x)) return x;
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.12g", x);
  const double r = std::strtod(buf, nullptr);
  return r == 0.0 ? 0.0 : r;
}

std::string format_number(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.12g", round12(x));
  return buf;
}

std::string format_extended(const Extended& x) { return format_number(x.as_double()); }

Json json_number(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  return round12(x);
}

Json json_extended(const Extended& x) { return json_number(x.as_double()); }

Json to_json(const ShiftSpace& space) {
  Json j;
  j["k"] = space.alphabet_size();
  j["dimension"] = space.dimension();
  if (space.dimension() == 1) {
    j["matrix"] = space.matrix();
    const auto idx = space.primitivity_index();
    j["primitivity_index"] = idx ? Json(*idx) : Json("not primitive");
  }
  return j;
}

Json to_json(const MarkovMeasure& m) {
  Json j;
  j["order"] = m.order();
  Json states = Json::array();
  for (std::size_t i = 0; i < m.states().size(); ++i) states.push_back(to_string(m.states()[i]));
  j["states"] = states;
  Json q = Json::array();
  for (Eigen::Index i = 0; i < m.transition().rows(); ++i) {
    Json row = Json::array();
    for (Eigen::Index c = 0; c < m.transition().cols(); ++c) row.push_back(json_number(m.transition()(i, c)));
    q.push_back(row);
  }
  j["transition"] = q;
  Json pi = Json::array();
  for (Eigen::Index i = 0; i < m.stationary().size(); ++i) pi.push_back(json_number(m.stationary()(i)));
  j["stationary"] = pi;
  j["entropy"] = json_number(m.entropy_rate());
  return j;
}

Json to_json(const InvariantMeasure& m) {
  Json comps = Json::array();
  for (const auto& c : m.components()) {
    Json j;
    j["weight"] = json_number(c.weight);
    const Json body = to_json(c.measure);
    for (auto it = body.begin(); it != body.end(); ++it) j[it.key()] = *it;
    comps.push_back(j);
  }
  Json out;
  out["components"] = comps;
  out["entropy"] = json_number(entropy_rate(m));
  return out;
}

Json to_json(const PressureResult& p) {
  Json j;
  j["route"] = to_string(p.route);
  j["value"] = json_extended(p.value);
  Json params;
  switch (p.route) {
    case Route::spectral: break;
    case Route::periodic: params["n"] = p.parameters.n; break;
    case Route::separated:
      params["n"] = p.parameters.n;
      params["r"] = p.parameters.r;
      break;
    case Route::strip: params["width"] = p.parameters.width; break;
    case Route::box:
      params["rows"] = p.parameters.box_rows;
      params["cols"] = p.parameters.box_cols;
      break;
  }
  j["parameters"] = params.is_null() ? Json::object() : params;
  return j;
}

CsvWriter::CsvWriter(std::vector<std::string> header) : columns_(header.size()) { line(header); }

void CsvWriter::row(const std::vector<std::string>& cells) {
  if (cells.size() != columns_) throw Error("csv row has " + std::to_string(cells.size()) + " cells, expected " + std::to_string(columns_));
  line(cells);
  ++rows_;
}

void CsvWriter::line(const std::vector<std::string>& cells) {
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (i) out_ += ',';
    const std::string& c = cells[i];
    if (c.find_first_of(",\"\r\n") == std::string::npos) {
      out_ += c;
      continue;
    }
    out_ += '"';
    for (char ch : c) {
      if (ch == '"') out_ += '"';
      out_ += ch;
    }
    out_ += '"';
  }
  out_ += "\r\n";
}

void write_file(const std::filesystem::path& path, const std::string& content) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write " + path.string());
  out << content;
  if (!out) throw Error("failed writing " + path.string());
}

}  // namespace thermoform::io
