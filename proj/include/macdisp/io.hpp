#pragma once

#include <string>
#include <utility>

#include "json.hpp"

#include "macdisp/dispersion.hpp"
#include "macdisp/model.hpp"
#include "macdisp/region.hpp"

namespace macdisp {

using ojson = nlohmann::ordered_json;

// Channel/input document: x1_size, x2_size, y_size, w[x1][x2][y], and
// optionally u_size, q_u, q1, q2.  Rows are renormalized only when within
// 1e-9 of total mass 1; anything else is rejected.
Channel channel_from_json(const ojson& doc);
InputSpec inputs_from_json(const ojson& doc, const Channel& ch);
std::pair<Channel, InputSpec> load_model_file(const std::string& path);

std::string kind_name(DispersionKind k);

ojson json_matrix(const Eigen::Matrix3d& m);
ojson json_rate(const RateVector& i);
ojson json_dispersion(const DispersionMatrix& v);
ojson json_moment_report(const MomentReport& rep);
ojson json_region(const RegionBoundary& b);

// CSV rows r1_bits,r2_bits,r1_nats,r2_nats,kind with a fixed numeric format,
// so identical inputs serialize to identical bytes.
std::string region_csv_header();
void append_region_csv(std::string& out, const RegionBoundary& b,
                       const std::string& label);

std::string format_double(double x);
void write_text_file(const std::string& path, const std::string& content);
std::string read_text_file(const std::string& path);

}  // namespace macdisp
