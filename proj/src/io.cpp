#include "macdisp/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "macdisp/errors.hpp"

namespace macdisp {

namespace {

constexpr double kRowTol = 1e-9;

double checked_number(const ojson& v, const std::string& where) {
  if (!v.is_number()) throw ValidationError(where + ": expected a number");
  const double x = v.get<double>();
  if (x < 0.0) throw ValidationError(where + ": negative probability");
  return x;
}

int checked_size(const ojson& doc, const std::string& key, int min_value) {
  if (!doc.contains(key)) throw ValidationError("model document: missing " + key);
  const ojson& v = doc.at(key);
  if (!v.is_number_integer()) throw ValidationError(key + ": expected an integer");
  const int n = v.get<int>();
  if (n < min_value) throw ValidationError(key + ": below minimum " + std::to_string(min_value));
  return n;
}

// Reads a probability row of known length, renormalizing mass-1 rounding only.
Eigen::VectorXd checked_row(const ojson& row, int len, const std::string& where) {
  if (!row.is_array() || int(row.size()) != len)
    throw ValidationError(where + ": expected an array of length " + std::to_string(len));
  Eigen::VectorXd out(len);
  for (int k = 0; k < len; ++k) out[k] = checked_number(row.at(k), where);
  const double s = out.sum();
  if (std::abs(s - 1.0) > kRowTol)
    throw ValidationError(where + ": row sums to " + format_double(s) + ", not 1");
  return out / s;
}

}  // namespace

Channel channel_from_json(const ojson& doc) {
  Channel ch;
  ch.nx1 = checked_size(doc, "x1_size", 1);
  ch.nx2 = checked_size(doc, "x2_size", 1);
  ch.ny = checked_size(doc, "y_size", 1);
  if (!doc.contains("w")) throw ValidationError("model document: missing w");
  const ojson& w = doc.at("w");
  if (!w.is_array() || int(w.size()) != ch.nx1)
    throw ValidationError("w: expected x1_size outer entries");
  ch.w.resize(ch.nx1 * ch.nx2, ch.ny);
  for (int x1 = 0; x1 < ch.nx1; ++x1) {
    const ojson& mid = w.at(x1);
    if (!mid.is_array() || int(mid.size()) != ch.nx2)
      throw ValidationError("w: expected x2_size entries at x1=" + std::to_string(x1));
    for (int x2 = 0; x2 < ch.nx2; ++x2)
      ch.w.row(ch.pair_index(x1, x2)) =
          checked_row(mid.at(x2), ch.ny,
                      "w[" + std::to_string(x1) + "][" + std::to_string(x2) + "]")
              .transpose();
  }
  return ch;
}

InputSpec inputs_from_json(const ojson& doc, const Channel& ch) {
  InputSpec inp;
  inp.nu = doc.contains("u_size") ? checked_size(doc, "u_size", 0) : 0;

  auto read_table = [&](const std::string& key, int cols) {
    const int rows = inp.u_count();
    Eigen::MatrixXd table(rows, cols);
    if (!doc.contains(key)) {
      table.setConstant(1.0 / cols);  // unspecified inputs default to uniform
      return table;
    }
    const ojson& v = doc.at(key);
    if (inp.nu == 0 && v.is_array() && (v.empty() || v.at(0).is_number())) {
      table.row(0) = checked_row(v, cols, key).transpose();
      return table;
    }
    if (!v.is_array() || int(v.size()) != rows)
      throw ValidationError(key + ": expected one row per u value");
    for (int u = 0; u < rows; ++u)
      table.row(u) = checked_row(v.at(u), cols, key + "[" + std::to_string(u) + "]").transpose();
    return table;
  };

  if (inp.nu > 0) {
    if (!doc.contains("q_u")) throw ValidationError("model document: u_size > 0 needs q_u");
    inp.q_u = checked_row(doc.at("q_u"), inp.nu, "q_u");
  } else if (doc.contains("q_u") && !doc.at("q_u").empty()) {
    throw ValidationError("q_u: must be absent or empty when u_size is 0");
  }
  inp.q1 = read_table("q1", ch.nx1);
  inp.q2 = read_table("q2", ch.nx2);
  return inp;
}

std::pair<Channel, InputSpec> load_model_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open model file: " + path);
  ojson doc;
  try {
    doc = ojson::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError("cannot parse " + path + ": " + e.what());
  }
  Channel ch = channel_from_json(doc);
  InputSpec inp = inputs_from_json(doc, ch);
  return {std::move(ch), std::move(inp)};
}

std::string kind_name(DispersionKind k) {
  switch (k) {
    case DispersionKind::cc: return "cc";
    case DispersionKind::iid: return "iid";
    case DispersionKind::cc_iid_1: return "cc_iid_1";
    case DispersionKind::cc_iid_2: return "cc_iid_2";
    case DispersionKind::joint: return "joint";
    case DispersionKind::finite_n: return "finite_n";
    case DispersionKind::sigma_n: return "sigma_n";
  }
  return "unknown";
}

ojson json_matrix(const Eigen::Matrix3d& m) {
  ojson rows = ojson::array();
  for (int r = 0; r < 3; ++r) {
    ojson row = ojson::array();
    for (int c = 0; c < 3; ++c) row.push_back(m(r, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

ojson json_rate(const RateVector& i) {
  return ojson{{"r1_nats", i.r1()}, {"r2_nats", i.r2()}, {"r12_nats", i.r12()}};
}

ojson json_dispersion(const DispersionMatrix& v) {
  return ojson{{"kind", kind_name(v.kind)}, {"m", json_matrix(v.m)}};
}

ojson json_moment_report(const MomentReport& rep) {
  ojson blocks = ojson::array();
  for (const BlockMoments& b : rep.blocks)
    blocks.push_back(ojson{{"u", b.u},
                           {"n_u", b.n_u},
                           {"single_cov", json_matrix(b.single_cov)},
                           {"m1", json_matrix(b.m1)},
                           {"m2", json_matrix(b.m2)},
                           {"m3", json_matrix(b.m3)},
                           {"m4", json_matrix(b.m4)},
                           {"cov", json_matrix(b.cov)}});
  return ojson{{"n", rep.n},
               {"blocks", std::move(blocks)},
               {"exact_cov", json_matrix(rep.exact_cov)},
               {"sigma_n", json_matrix(rep.sigma_n().m)}};
}

ojson json_region(const RegionBoundary& b) {
  const char* kind = b.kind == RegionKind::first_order     ? "first_order"
                     : b.kind == RegionKind::second_order ? "second_order"
                                                          : "capacity_union";
  ojson prov{{"i", json_rate(b.prov.i)}};
  if (b.prov.has_v) {
    prov["v"] = json_matrix(b.prov.v);
    prov["n"] = b.prov.n;
    prov["eps"] = b.prov.eps;
    prov["rank"] = b.prov.rank;
    prov["quadrature_tolerance"] = b.prov.quad_tol;
  }
  if (!b.prov.family.empty()) prov["family"] = b.prov.family;
  ojson points = ojson::array();
  for (const auto& p : b.points) points.push_back(ojson::array({p[0], p[1]}));
  return ojson{{"kind", kind},
               {"empty_region", b.empty_region},
               {"provenance", std::move(prov)},
               {"points_nats", std::move(points)}};
}

std::string region_csv_header() { return "r1_bits,r2_bits,r1_nats,r2_nats,kind\n"; }

void append_region_csv(std::string& out, const RegionBoundary& b,
                       const std::string& label) {
  constexpr double kNatsToBits = 1.4426950408889634074;  // 1/log 2
  for (const auto& p : b.points) {
    out += format_double(p[0] * kNatsToBits);
    out += ',';
    out += format_double(p[1] * kNatsToBits);
    out += ',';
    out += format_double(p[0]);
    out += ',';
    out += format_double(p[1]);
    out += ',';
    out += label;
    out += '\n';
  }
}

std::string format_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.12g", x);
  return buf;
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ValidationError("cannot write file: " + path);
  out << content;
  if (!out) throw ValidationError("write failed: " + path);
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace macdisp
