#pragma once

// JSON serialization of certificates, solve reports, multistart reports,
// assumption reports and oracle results, plus short text summaries.

#include <string>

#include <json.hpp>

#include "globalsdp/kkt.hpp"
#include "globalsdp/oracle.hpp"
#include "globalsdp/solver.hpp"

namespace globalsdp {

using Json = nlohmann::ordered_json;

/// Rows of the lower triangle: [[a00], [a10, a11], ...].
Json lower_rows(const SymMat& a);

Json to_json(const KktResiduals& r);
Json to_json(const KktCertificate& c);
Json to_json(const AssumptionReport& r);
Json to_json(const DerivativeCheck& d);
Json to_json(const GridSpec& g);
Json to_json(const GridResult& r);

struct ReportFlags {
  bool trace = false;
  bool timing = false;
};

Json to_json(const SolveReport& r, const ReportFlags& flags = {});
Json to_json(const MultistartReport& r, const ReportFlags& flags = {});

std::string summary(const SolveReport& r);
std::string summary(const MultistartReport& r);
std::string summary(const AssumptionReport& r);
std::string summary(const KktCertificate& c);

}  // namespace globalsdp
