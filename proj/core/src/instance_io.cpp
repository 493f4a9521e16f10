#include "bhtbp/instance_io.hpp"

#include <charconv>
#include <cstdlib>
#include <iomanip>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <type_traits>

#include "bhtbp/errors.hpp"

namespace bhtbp {

namespace {

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (start <= s.size()) {
    const std::size_t end = s.find(sep, start);
    const std::size_t stop = end == std::string_view::npos ? s.size() : end;
    if (stop > start) out.push_back(s.substr(start, stop - start));
    if (end == std::string_view::npos) break;
    start = end + 1;
  }
  return out;
}

template <typename T>
T parse_number(std::string_view tok, const char* what) {
  T value{};
  if constexpr (std::is_floating_point_v<T>) {
    // strtod handles inf/nan spellings that from_chars rejects on older toolchains
    std::string buf(tok);
    char* end = nullptr;
    value = std::strtod(buf.c_str(), &end);
    if (end != buf.c_str() + buf.size() || buf.empty()) {
      throw ParseError(std::string("instance: bad ") + what + " '" + buf + "'");
    }
  } else {
    auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), value);
    if (ec != std::errc{} || ptr != tok.data() + tok.size()) {
      throw ParseError(std::string("instance: bad ") + what + " '" + std::string(tok) + "'");
    }
  }
  return value;
}

std::pair<std::string_view, std::string_view> split_pair(std::string_view tok) {
  const auto colon = tok.find(':');
  if (colon == std::string_view::npos) {
    throw ParseError("instance: expected 'a:b', got '" + std::string(tok) + "'");
  }
  return {tok.substr(0, colon), tok.substr(colon + 1)};
}

}  // namespace

void write_instance(std::ostream& os, const SparseBernoulliMatrix& matrix, std::uint64_t seed,
                    const SparseSignal* signal, const Measurement* meas) {
  os << matrix.cols() << ' ' << matrix.rows() << ' ' << matrix.col_weight() << ' ' << seed
     << '\n';
  for (std::size_t i = 0; i < matrix.cols(); ++i) {
    const auto col = matrix.column(i);
    if (col.empty()) os << '-';
    for (std::size_t t = 0; t < col.size(); ++t) {
      os << (t ? "," : "") << col[t].index << ':' << int{col[t].sign};
    }
    os << '\n';
  }
  const auto old_precision = os.precision(17);
  if (signal) {
    os << "x ";
    bool any = false;
    for (std::size_t i = 0; i < signal->values.size(); ++i) {
      if (signal->values[i] == 0.0) continue;
      os << (any ? "," : "") << i << ':' << signal->values[i];
      any = true;
    }
    if (!any) os << '-';
    os << '\n';
  }
  if (meas) {
    os << "z ";
    for (std::size_t j = 0; j < meas->z.size(); ++j) os << (j ? "," : "") << meas->z[j];
    os << "\nnoise_std " << meas->noise_std << '\n';
  }
  os.precision(old_precision);
}

Instance read_instance(std::istream& is) {
  std::string line;
  if (!std::getline(is, line)) throw ParseError("instance: missing header");
  std::istringstream header(line);
  std::size_t n = 0, m = 0, L = 0;
  Instance inst;
  if (!(header >> n >> m >> L >> inst.seed)) throw ParseError("instance: bad header '" + line + "'");

  std::vector<std::vector<SignedIndex>> cols(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (!std::getline(is, line)) throw ParseError("instance: truncated column list");
    if (line == "-") continue;
    for (auto tok : split(line, ',')) {
      auto [r, s] = split_pair(tok);
      const int sign = parse_number<int>(s, "sign");
      cols[i].push_back({parse_number<std::uint32_t>(r, "row"), static_cast<std::int8_t>(sign)});
    }
  }
  try {
    inst.matrix = SparseBernoulliMatrix::from_columns(m, std::move(cols));
  } catch (const InvalidSpec& e) {
    throw ParseError(std::string("instance: ") + e.what());
  }
  if (L != 0 && inst.matrix.col_weight() != L) throw ParseError("instance: column weight mismatch");

  while (std::getline(is, line)) {
    if (line.empty()) continue;
    const auto space = line.find(' ');
    const std::string key = line.substr(0, space);
    const std::string_view rest =
        space == std::string::npos ? std::string_view{} : std::string_view(line).substr(space + 1);
    if (key == "x") {
      SparseSignal sig;
      sig.values.assign(n, 0.0);
      if (rest != "-") {
        for (auto tok : split(rest, ',')) {
          auto [i, v] = split_pair(tok);
          const auto idx = parse_number<std::size_t>(i, "index");
          if (idx >= n) throw ParseError("instance: signal index out of range");
          sig.values[idx] = parse_number<double>(v, "value");
        }
      }
      sig.support = StateVector::of(sig.values);
      inst.signal = std::move(sig);
    } else if (key == "z") {
      if (!inst.measurement) inst.measurement.emplace();
      inst.measurement->z.clear();
      for (auto tok : split(rest, ',')) inst.measurement->z.push_back(parse_number<double>(tok, "z"));
      if (inst.measurement->z.size() != m) throw ParseError("instance: z length != m");
    } else if (key == "noise_std") {
      if (!inst.measurement) inst.measurement.emplace();
      inst.measurement->noise_std = parse_number<double>(rest, "noise_std");
    } else {
      throw ParseError("instance: unknown record '" + key + "'");
    }
  }
  return inst;
}

}  // namespace bhtbp
