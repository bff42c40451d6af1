#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>

#include <json.hpp>

#include "bbvp/billiard.hpp"
#include "bbvp/multiplicity.hpp"

namespace bbvp {

using Json = nlohmann::ordered_json;

const char* version();

/// Header `t,x_1..x_n,v_1..v_n,segment_id`, positions shifted back to the
/// original box. Impacts appear twice: as the last row of one segment with
/// the pre-impact velocity and the first row of the next with the
/// post-impact velocity. 17 significant digits.
void write_trajectory_csv(std::ostream& os, const BilliardSolution& sol);

/// Inverse of write_trajectory_csv. Positions are shifted by -shift into
/// the normalized box; impact axes are recovered from the box faces.
/// Throws BadInput on malformed input.
BilliardSolution read_trajectory_csv(std::istream& is, const BoxDomain& normalized_box,
                                     const Vec& shift, const Vec& A, const Vec& B,
                                     double horizon);

Json to_json(const Vec& v);
Json to_json(const ImpactEvent& e, const Vec& shift);
Json to_json(const VerifyReport& r);
Json to_json(const CrosscheckReport& r);
Json to_json(const ContinuationResult& r);

/// {xi, p, target, status, p_impacts, total_mult, residuals, ...}
Json branch_json(const BranchOutcome& b, const Vec& shift);
Json certificate_json(const MultiplicityCertificate& cert, const Vec& shift,
                      const std::string& config_text);

/// Writes to a sibling temporary and renames over `path`.
void write_file_atomic(const std::filesystem::path& path, const std::string& content);

}  // namespace bbvp
