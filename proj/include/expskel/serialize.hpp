#pragma once

#include <string>

#include <json.hpp>

#include "expskel/currents.hpp"
#include "expskel/genericity.hpp"
#include "expskel/pencil.hpp"
#include "expskel/section.hpp"
#include "expskel/skeleton.hpp"
#include "expskel/solve.hpp"

namespace expskel {

using Json = nlohmann::json;

/*
 * JSON schemas (diff-friendly): complex numbers are [re, im] pairs;
 * ExpSum is {dim, terms: [{alpha: [re,im], m: [[re,im], ...]}]};
 * Net is {epsilon, periodic, domain: [x0,y0,x1,y1], points: [[re,im], ...],
 * delta}.  All emitters round-trip to identical canonical form.
 */

Json complex_json(Complex z);
Complex complex_from(const Json& j);
Json cvec_json(const CVec& v);
CVec cvec_from(const Json& j);
Json box_json(const Box& b);
Box box_from(const Json& j);

Json expsum_json(const ExpSum& s);
ExpSum expsum_from(const Json& j);

Json report_json(const GenericityReport& r);
Json skeleton_json(const Skeleton2D& s);
Json rootset_json(const RootSet& r);
Json boundreport_json(const BoundReport& r);

Json pencil_json(const PencilSpec& p);
PencilSpec pencil_from(const Json& j);
Json singular_json(const SingularSet& s);
Json pencil_verification_json(const PencilVerification& v);

Json net_json(const Net& n);
Net net_from(const Json& j);
Json section_json(const SectionSpec& s);
SectionSpec section_from(const Json& j);
Json clusters_json(const ClusterSet& c);
Json coloring_json(const Coloring& c);

Json tables_json(const std::vector<PairingTable>& t);
std::string table_csv(const PairingTable& t);

// Shortest round-trip decimal form (used for CSV and SVG).
std::string fmt_double(double v);

std::string dump_canonical(const Json& j);

}  // namespace expskel
