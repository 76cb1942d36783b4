#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "thermoform/ldp.hpp"

namespace thermoform::io {

using Json = nlohmann::ordered_json;

/// A JSON value together with its location in the document, for error messages.
class Field {
 public:
  Field(const Json& value, std::string path) : value_(&value), path_(std::move(path)) {}

  const Json& json() const { return *value_; }
  const std::string& path() const { return path_; }

  bool has(const std::string& key) const;
  Field at(const std::string& key) const;
  std::optional<Field> find(const std::string& key) const;
  Field at(std::size_t i) const;
  std::size_t size() const;

  [[noreturn]] void fail(const std::string& message) const;
  void require_object() const;
  void require_array() const;
  /// Rejects keys not in `allowed`.
  void allow_only(std::initializer_list<const char*> allowed) const;

  double as_double() const;
  long long as_int() const;
  int as_int_in(long long lo, long long hi) const;
  bool as_bool() const;
  std::string as_string() const;
  std::vector<double> as_doubles() const;
  std::vector<int> as_ints_in(long long lo, long long hi) const;

 private:
  const Json* value_;
  std::string path_;
};

/// Reruns fn, prefixing any ValidationError with the field path.
template <class Fn>
auto with_path(const Field& f, Fn&& fn) -> decltype(fn()) {
  try {
    return fn();
  } catch (const CapExceeded&) {
    throw;
  } catch (const ValidationError& e) {
    f.fail(e.what());
  }
}

Json read_json_file(const std::filesystem::path& path);

/// { "k": int, "matrix": [[0|1, ...]], "dimension": 1|2 }
ShiftSpace parse_space(const Field& f);
Limits parse_limits(const Field& f);
/// { "window": m, "values": { word: real } }, { "constant": c, "window": m },
/// { "indicator": word, "scale": c } or { "zero": m }.
Potential parse_potential(const ShiftSpace& space, const Field& f, const Limits& limits);
/// Array of potential specs, or { "cylinders": n }.
ObservableFamily parse_observables(const ShiftSpace& space, const Field& f, const Limits& limits);
/// { "components": [ { "weight", "order", "transition", "stationary"? } ] },
/// { "equilibrium": potential }, { "periodic_orbit": word } or { "bernoulli": [p...] };
/// "mix": [ { "weight": w, "measure": spec } ] combines any of these.
InvariantMeasure parse_measure(const ShiftSpace& space, const Field& f, const Limits& limits);
BoxQuery parse_box(const Field& f);
PairInteraction parse_interaction(int k, const Field& f);
DualOptions parse_dual(const Field& f);

/// Rounds to 12 significant digits.
double round12(double x);
/// 12 significant digits; infinities as "inf" / "-inf".
std::string format_number(double x);
std::string format_extended(const Extended& x);
Json json_number(double x);
Json json_extended(const Extended& x);

Json to_json(const ShiftSpace& space);
Json to_json(const MarkovMeasure& m);
Json to_json(const InvariantMeasure& m);
Json to_json(const PressureResult& p);

/// RFC-4180 table with a mandatory header row.
class CsvWriter {
 public:
  explicit CsvWriter(std::vector<std::string> header);
  void row(const std::vector<std::string>& cells);
  std::string str() const { return out_; }
  std::size_t rows() const { return rows_; }

 private:
  void line(const std::vector<std::string>& cells);
  std::size_t columns_;
  std::size_t rows_ = 0;
  std::string out_;
};

void write_file(const std::filesystem::path& path, const std::string& content);

}  // namespace thermoform::io
