#include "osmm/instance_io.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>
#include <nlohmann/json.hpp>
#include <sstream>

namespace osmm {

namespace {

using nlohmann::json;

constexpr char kMagic[8] = {'O', 'S', 'M', 'M', 'I', 'N', 'S', 'T'};

template <typename T>
T to_little(T v) {
  if constexpr (std::endian::native == std::endian::big) {
    unsigned char b[sizeof(T)];
    std::memcpy(b, &v, sizeof(T));
    for (std::size_t i = 0; i < sizeof(T) / 2; ++i) std::swap(b[i], b[sizeof(T) - 1 - i]);
    std::memcpy(&v, b, sizeof(T));
  }
  return v;
}

template <typename T>
void put(std::string& out, T v) {
  v = to_little(v);
  char b[sizeof(T)];
  std::memcpy(b, &v, sizeof(T));
  out.append(b, sizeof(T));
}

template <typename T>
T get(std::string_view bytes, std::size_t& pos) {
  if (pos + sizeof(T) > bytes.size()) throw Error(ErrorCode::InvalidArgument, "instance: truncated file");
  T v;
  std::memcpy(&v, bytes.data() + pos, sizeof(T));
  pos += sizeof(T);
  return to_little(v);
}

json index_list(const IndexList& idx) {
  json j = json::array();
  for (Eigen::Index i : idx) j.push_back(static_cast<std::int64_t>(i));
  return j;
}

IndexList read_index_list(const json& j) {
  IndexList idx;
  for (const auto& v : j) idx.push_back(static_cast<Eigen::Index>(v.get<std::int64_t>()));
  return idx;
}

/// Collects arrays (data, g atoms, x0) in a fixed order together with the
/// JSON description of g.
struct Layout {
  std::vector<std::pair<std::string, const Matrix*>> arrays;
  std::vector<Matrix> owned;  // vectors converted to column matrices
  json g;

  void add(const std::string& name, const Matrix& M) { arrays.emplace_back(name, &M); }
  void add_vector(const std::string& name, const Vector& v) {
    owned.emplace_back(Matrix(Eigen::Map<const Matrix>(v.data(), v.size(), 1)));
    names.push_back(name);
  }
  void finish() {
    for (std::size_t i = 0; i < owned.size(); ++i) arrays.emplace_back(names[i], &owned[i]);
  }

 private:
  std::vector<std::string> names;
};

Vector as_vector(const Matrix& M) { return Eigen::Map<const Vector>(M.data(), M.size()); }

}  // namespace

std::string serialize_instance(const ProblemInstance& inst) {
  Layout layout;
  layout.owned.reserve(16);
  for (const auto& [name, M] : inst.arrays) layout.add("data." + name, M);

  const StructuredFunction& g = inst.g;
  json& jg = layout.g;
  jg["dim"] = static_cast<std::int64_t>(g.dim);
  if (g.linear_cost) layout.add_vector("g.linear_cost", *g.linear_cost);
  if (g.quad_factor) layout.add("g.quad_factor", *g.quad_factor);
  if (g.box) {
    layout.add_vector("g.box.lower", g.box->lower);
    layout.add_vector("g.box.upper", g.box->upper);
  }
  jg["nonneg"] = index_list(g.nonneg);
  if (g.simplex) jg["simplex"] = {{"coords", index_list(g.simplex->coords)}};
  if (g.equalities) {
    layout.add("g.equalities.A", g.equalities->A);
    layout.add_vector("g.equalities.b", g.equalities->b);
  }
  if (g.inequalities) {
    layout.add("g.inequalities.C", g.inequalities->C);
    layout.add_vector("g.inequalities.d", g.inequalities->d);
  }
  if (g.l1_ball) {
    jg["l1_ball"] = {{"coords", index_list(g.l1_ball->coords)}, {"radius", g.l1_ball->radius}};
  }
  if (g.hinge_budget) {
    jg["hinge_budget"] = {{"coords", index_list(g.hinge_budget->coords)},
                          {"budget", g.hinge_budget->budget}};
    layout.add_vector("g.hinge_budget.linear", g.hinge_budget->linear);
    layout.add_vector("g.hinge_budget.hinge", g.hinge_budget->hinge);
    layout.add_vector("g.hinge_budget.kink", g.hinge_budget->kink);
  }
  layout.add_vector("x0", inst.x0);
  layout.finish();

  json header;
  header["kind"] = inst.kind;
  header["params"] = json::object();
  for (const auto& [k, v] : inst.params) header["params"][k] = v;
  header["g"] = jg;
  json table = json::array();
  std::uint64_t offset = 0;
  for (const auto& [name, M] : layout.arrays) {
    table.push_back({{"name", name},
                     {"rows", static_cast<std::int64_t>(M->rows())},
                     {"cols", static_cast<std::int64_t>(M->cols())},
                     {"offset", offset}});
    offset += static_cast<std::uint64_t>(M->size()) * sizeof(double);
  }
  header["arrays"] = table;
  const std::string text = header.dump();

  std::string out;
  out.reserve(8 + 4 + 8 + text.size() + offset);
  out.append(kMagic, sizeof(kMagic));
  put<std::uint32_t>(out, kInstanceFormatVersion);
  put<std::uint64_t>(out, text.size());
  out += text;
  for (const auto& [name, M] : layout.arrays) {
    for (Eigen::Index i = 0; i < M->size(); ++i) put<double>(out, M->data()[i]);
  }
  return out;
}

ProblemInstance deserialize_instance(std::string_view bytes) {
  if (bytes.size() < sizeof(kMagic) || std::memcmp(bytes.data(), kMagic, sizeof(kMagic)) != 0) {
    throw Error(ErrorCode::InvalidArgument, "instance: bad magic");
  }
  std::size_t pos = sizeof(kMagic);
  const auto version = get<std::uint32_t>(bytes, pos);
  if (version != kInstanceFormatVersion) {
    throw Error(ErrorCode::InvalidArgument, "instance: unsupported version " + std::to_string(version));
  }
  const auto header_len = get<std::uint64_t>(bytes, pos);
  if (pos + header_len > bytes.size()) throw Error(ErrorCode::InvalidArgument, "instance: truncated header");
  json header;
  try {
    header = json::parse(bytes.substr(pos, header_len));
  } catch (const json::exception& e) {
    throw Error(ErrorCode::InvalidArgument, std::string("instance: bad header: ") + e.what());
  }
  const std::size_t payload = pos + header_len;

  try {
    std::map<std::string, Matrix> arrays;
    for (const auto& entry : header.at("arrays")) {
      const auto rows = entry.at("rows").get<std::int64_t>();
      const auto cols = entry.at("cols").get<std::int64_t>();
      const auto offset = entry.at("offset").get<std::uint64_t>();
      if (rows < 0 || cols < 0) throw Error(ErrorCode::InvalidArgument, "instance: negative shape");
      Matrix M(rows, cols);
      std::size_t p = payload + offset;
      for (Eigen::Index i = 0; i < M.size(); ++i) M.data()[i] = get<double>(bytes, p);
      arrays.emplace(entry.at("name").get<std::string>(), std::move(M));
    }
    auto take = [&arrays](const std::string& name) -> const Matrix& {
      const auto it = arrays.find(name);
      if (it == arrays.end()) throw Error(ErrorCode::InvalidArgument, "instance: missing array " + name);
      return it->second;
    };

    ProblemInstance inst;
    inst.kind = header.at("kind").get<std::string>();
    for (const auto& [k, v] : header.at("params").items()) inst.params[k] = v.get<double>();
    for (const auto& [name, M] : arrays) {
      if (name.rfind("data.", 0) == 0) inst.arrays[name.substr(5)] = M;
    }

    const json& jg = header.at("g");
    StructuredFunction g(static_cast<Eigen::Index>(jg.at("dim").get<std::int64_t>()));
    if (arrays.count("g.linear_cost")) g.linear_cost = as_vector(take("g.linear_cost"));
    if (arrays.count("g.quad_factor")) g.quad_factor = take("g.quad_factor");
    if (arrays.count("g.box.lower")) {
      g.box = Box{as_vector(take("g.box.lower")), as_vector(take("g.box.upper"))};
    }
    if (jg.contains("nonneg")) g.nonneg = read_index_list(jg.at("nonneg"));
    if (jg.contains("simplex")) g.simplex = SimplexAtom{read_index_list(jg.at("simplex").at("coords"))};
    if (arrays.count("g.equalities.A")) {
      g.equalities = EqualityAtom{take("g.equalities.A"), as_vector(take("g.equalities.b"))};
    }
    if (arrays.count("g.inequalities.C")) {
      g.inequalities = InequalityAtom{take("g.inequalities.C"), as_vector(take("g.inequalities.d"))};
    }
    if (jg.contains("l1_ball")) {
      g.l1_ball = L1BallAtom{read_index_list(jg.at("l1_ball").at("coords")),
                             jg.at("l1_ball").at("radius").get<double>()};
    }
    if (jg.contains("hinge_budget")) {
      HingeBudgetAtom hb;
      hb.coords = read_index_list(jg.at("hinge_budget").at("coords"));
      hb.budget = jg.at("hinge_budget").at("budget").get<double>();
      hb.linear = as_vector(take("g.hinge_budget.linear"));
      hb.hinge = as_vector(take("g.hinge_budget.hinge"));
      hb.kink = as_vector(take("g.hinge_budget.kink"));
      g.hinge_budget = hb;
    }
    g.validate();
    inst.g = std::move(g);
    inst.x0 = as_vector(take("x0"));
    if (inst.x0.size() != inst.g.dim) throw Error(ErrorCode::DimensionMismatch, "instance: x0 size != n");
    return inst;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::InvalidArgument, std::string("instance: malformed header: ") + e.what());
  }
}

void save_instance(const ProblemInstance& instance, const std::filesystem::path& path) {
  const std::string bytes = serialize_instance(instance);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::Io, "cannot open " + path.string() + " for writing");
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(ErrorCode::Io, "failed writing " + path.string());
}

ProblemInstance load_instance(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return deserialize_instance(buf.str());
}

}  // namespace osmm
