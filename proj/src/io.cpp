#include "capot/io.hpp"

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

namespace capot {

namespace {

[[noreturn]] void fail(const std::string& path, const std::string& what) {
  throw std::runtime_error(path + ": " + what);
}

[[noreturn]] void fail_line(const std::string& path, std::size_t line, const std::string& what) {
  throw std::runtime_error(path + ":" + std::to_string(line) + ": " + what);
}

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::ifstream open_in(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(path, "cannot open for reading");
  return in;
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path);
  if (!out) fail(path, "cannot open for writing");
  return out;
}

// One CSV record; quoted fields may contain commas and doubled quotes.
std::vector<std::string> split_csv(const std::string& path, std::size_t line,
                                   const std::string& text) {
  std::vector<std::string> fields;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          cur += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        cur += c;
      }
    } else if (c == '"') {
      if (!cur.empty()) fail_line(path, line, "stray quote inside unquoted field");
      quoted = true;
    } else if (c == ',') {
      fields.push_back(std::move(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  if (quoted) fail_line(path, line, "unterminated quoted field");
  fields.push_back(std::move(cur));
  return fields;
}

std::string quote_csv(const std::string& field) {
  if (field.find_first_of(",\"\n") == std::string::npos) return field;
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

double parse_double(const std::string& path, std::size_t line, const std::string& field) {
  try {
    std::size_t used = 0;
    const double v = std::stod(field, &used);
    if (used != field.size()) throw std::invalid_argument("trailing characters");
    if (!std::isfinite(v)) throw std::invalid_argument("not finite");
    return v;
  } catch (const std::exception&) {
    fail_line(path, line, "not a finite number: '" + field + "'");
  }
}

// Lines with trailing \r (CRLF input) are trimmed; blank trailing lines skip.
bool next_record(std::istream& in, std::string& text) {
  while (std::getline(in, text)) {
    if (!text.empty() && text.back() == '\r') text.pop_back();
    if (!text.empty()) return true;
  }
  return false;
}

}  // namespace

Capacity load_capacity_json(const std::string& path, bool validate) {
  std::ifstream in = open_in(path);
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    fail(path, e.what());
  }
  if (!doc.is_object() || !doc.contains("ground") || !doc.contains("values"))
    fail(path, "expected an object with 'ground' and 'values'");
  if (!doc["ground"].is_array() || !doc["values"].is_array())
    fail(path, "'ground' and 'values' must be arrays");

  std::vector<std::string> labels;
  for (const auto& l : doc["ground"]) {
    if (!l.is_string()) fail(path, "ground labels must be strings");
    labels.push_back(l.get<std::string>());
  }
  const std::size_t n = labels.size();
  if (n > kDenseLimit)
    fail(path, "ground set too large for a dense table (limit " + std::to_string(kDenseLimit) + ")");

  const std::size_t want = std::size_t{1} << n;
  if (doc["values"].size() != want)
    fail(path, "expected " + std::to_string(want) + " values, found " +
                   std::to_string(doc["values"].size()));
  std::vector<double> values;
  values.reserve(want);
  for (std::size_t i = 0; i < want; ++i) {
    const auto& v = doc["values"][i];
    if (!v.is_number()) fail(path, "values[" + std::to_string(i) + "] is not a number");
    const double d = v.get<double>();
    if (!std::isfinite(d)) fail(path, "values[" + std::to_string(i) + "] is not finite");
    values.push_back(d);
  }
  if (std::fabs(values[0]) > 1e-12) fail(path, "values[0] must be 0 (empty set)");
  if (validate) {
    for (std::size_t a = 0; a < want; ++a)
      for (std::size_t w = 0; w < n; ++w) {
        if (a & (std::size_t{1} << w)) continue;
        const std::size_t b = a | (std::size_t{1} << w);
        if (values[b] < values[a] - kDefaultTol)
          fail(path, "values[" + std::to_string(b) + "] < values[" + std::to_string(a) +
                         "] breaks monotonicity");
      }
  }

  GroundSet ground = n == 0 ? GroundSet() : GroundSet(std::move(labels));
  try {
    return Capacity::dense_unchecked(std::move(ground), std::move(values));
  } catch (const std::exception& e) {
    fail(path, e.what());
  }
}

void save_capacity_json(const std::string& path, const Capacity& gamma) {
  const Capacity dense = gamma.densified();
  nlohmann::json doc;
  doc["ground"] = dense.ground().labels();
  doc["values"] = dense.dense_values();
  std::ofstream out = open_out(path);
  out << doc.dump(2) << '\n';
  if (!out) fail(path, "write failed");
}

GroundFunction load_ground_function_csv(const std::string& path) {
  std::ifstream in = open_in(path);
  std::string text;
  std::size_t line = 0;

  if (!next_record(in, text)) fail(path, "empty file");
  ++line;
  const auto header = split_csv(path, line, text);
  if (header.size() != 2 || header[0] != "label" || header[1] != "value")
    fail_line(path, line, "expected header 'label,value'");

  std::vector<std::string> labels;
  std::vector<double> values;
  while (next_record(in, text)) {
    ++line;
    const auto fields = split_csv(path, line, text);
    if (fields.size() != 2) fail_line(path, line, "expected two fields");
    labels.push_back(fields[0]);
    values.push_back(parse_double(path, line, fields[1]));
  }
  if (labels.empty()) fail(path, "no data rows");
  try {
    return GroundFunction(GroundSet(std::move(labels)), std::move(values));
  } catch (const std::exception& e) {
    fail(path, e.what());
  }
}

void save_ground_function_csv(const std::string& path, const GroundFunction& f) {
  std::ofstream out = open_out(path);
  out << "label,value\n";
  for (std::size_t i = 0; i < f.size(); ++i)
    out << quote_csv(f.ground.label(i)) << ',' << format_double(f[i]) << '\n';
  if (!out) fail(path, "write failed");
}

LossMatrix load_loss_csv(const std::string& path) {
  std::ifstream in = open_in(path);
  std::string text;
  std::size_t line = 0;

  if (!next_record(in, text)) fail(path, "empty file");
  ++line;
  auto header = split_csv(path, line, text);
  if (header.size() < 2) fail_line(path, line, "expected a corner cell and column labels");
  std::vector<std::string> ylabels(header.begin() + 1, header.end());
  const std::size_t q = ylabels.size();

  std::vector<std::string> xlabels;
  std::vector<double> values;
  while (next_record(in, text)) {
    ++line;
    const auto fields = split_csv(path, line, text);
    if (fields.size() != q + 1)
      fail_line(path, line,
                "expected " + std::to_string(q + 1) + " fields, found " +
                    std::to_string(fields.size()));
    xlabels.push_back(fields[0]);
    for (std::size_t j = 0; j < q; ++j) values.push_back(parse_double(path, line, fields[j + 1]));
  }
  if (xlabels.empty()) fail(path, "no data rows");
  try {
    ProductSpace sp{GroundSet(std::move(xlabels)), GroundSet(std::move(ylabels))};
    return LossMatrix(std::move(sp), std::move(values));
  } catch (const std::exception& e) {
    fail(path, e.what());
  }
}

void save_loss_csv(const std::string& path, const LossMatrix& loss) {
  std::ofstream out = open_out(path);
  out << "loss";
  for (const auto& l : loss.space().y().labels()) out << ',' << quote_csv(l);
  out << '\n';
  for (std::size_t i = 0; i < loss.space().x().size(); ++i) {
    out << quote_csv(loss.space().x().label(i));
    for (std::size_t j = 0; j < loss.space().y().size(); ++j)
      out << ',' << format_double(loss.at(i, j));
    out << '\n';
  }
  if (!out) fail(path, "write failed");
}

}  // namespace capot
