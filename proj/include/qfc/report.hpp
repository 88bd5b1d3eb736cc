#ifndef QFC_REPORT_HPP
#define QFC_REPORT_HPP

#include "qfc/evolution.hpp"
#include "qfc/operators.hpp"
#include "qfc/states.hpp"

#include <json.hpp>

#include <fstream>
#include <string>

namespace qfc {

using Json = nlohmann::ordered_json;

// {label, n, weight[], re[][], im[][]} container for golden-file tests
Json operator_to_json(const WeightedOperator& A);
WeightedOperator operator_from_json(const Json& j);

Json report_to_json(const StateReport& rep);
Json ladder_to_json(const std::vector<LadderEntry>& ladder);

void write_text(const std::string& path, const std::string& content);

// CSV helpers; rows are written in the given order, floats with shortest
// round-trip formatting matching the JSON output
std::string csv_table(const std::vector<std::string>& header,
                      const std::vector<std::vector<double>>& rows);

} // namespace qfc

#endif
