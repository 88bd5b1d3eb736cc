#include "qfc/report.hpp"

#include <cstdio>
#include <stdexcept>

namespace qfc {

Json operator_to_json(const WeightedOperator& A) {
  Json j;
  j["label"] = A.label;
  j["n"] = A.dim();
  j["weight"] = std::vector<double>(A.weight.values.data(), A.weight.values.data() + A.dim());
  std::vector<std::vector<double>> re(A.dim()), im(A.dim());
  for (int i = 0; i < A.dim(); ++i) {
    re[i].resize(A.dim());
    im[i].resize(A.dim());
    for (int k = 0; k < A.dim(); ++k) {
      re[i][k] = A.mat(i, k).real();
      im[i][k] = A.mat(i, k).imag();
    }
  }
  j["re"] = re;
  j["im"] = im;
  return j;
}

WeightedOperator operator_from_json(const Json& j) {
  WeightedOperator A;
  A.label = j.at("label").get<std::string>();
  int n = j.at("n").get<int>();
  auto w = j.at("weight").get<std::vector<double>>();
  if (static_cast<int>(w.size()) != n) throw std::invalid_argument("operator_from_json: bad weight");
  A.weight.values = Eigen::Map<const RealVector>(w.data(), n);
  A.mat.resize(n, n);
  const auto& re = j.at("re");
  const auto& im = j.at("im");
  for (int i = 0; i < n; ++i)
    for (int k = 0; k < n; ++k)
      A.mat(i, k) = Complex(re.at(i).at(k).get<double>(), im.at(i).at(k).get<double>());
  return A;
}

Json report_to_json(const StateReport& rep) {
  Json j;
  j["defects"]["hermiticity"] = rep.hermiticity_defect;
  j["defects"]["psd_plus"] = rep.psd_defect_plus;
  j["defects"]["psd_minus"] = rep.psd_defect_minus;
  j["defects"]["ccr"] = rep.ccr_defect;
  j["valid"] = rep.valid;
  return j;
}

Json ladder_to_json(const std::vector<LadderEntry>& ladder) {
  Json arr = Json::array();
  for (const auto& e : ladder) {
    Json row;
    row["horizon"] = e.horizon;
    row["defect"] = e.defect;
    row["fitted_rate"] = e.fitted_rate;
    arr.push_back(row);
  }
  return arr;
}

void write_text(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << content;
}

std::string csv_table(const std::vector<std::string>& header,
                      const std::vector<std::vector<double>>& rows) {
  std::string out;
  for (size_t i = 0; i < header.size(); ++i) {
    out += header[i];
    out += (i + 1 < header.size()) ? ',' : '\n';
  }
  for (const auto& row : rows) {
    for (size_t i = 0; i < row.size(); ++i) {
      // shortest round-trip via the JSON serializer keeps goldens stable
      out += Json(row[i]).dump();
      out += (i + 1 < row.size()) ? ',' : '\n';
    }
  }
  return out;
}

} // namespace qfc
