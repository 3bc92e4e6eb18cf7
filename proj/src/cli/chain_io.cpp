#include <fstream>
#include <sstream>

#include <json.hpp>

#include "mclt/cli.hpp"

namespace mclt::cli {

using nlohmann::json;

ChainFile parse_chain(std::string_view json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw Error(Errc::ParseError, e.what());
  }
  if (!doc.is_object() || !doc.contains("P")) throw Error(Errc::ParseError, "chain file needs an object with key \"P\"");

  std::vector<std::vector<double>> rows;
  std::vector<std::string> labels;
  std::optional<Observable> f;
  try {
    rows = doc.at("P").get<std::vector<std::vector<double>>>();
    if (doc.contains("labels"))
      labels = doc.at("labels").get<std::vector<std::string>>();
    else
      labels = index_labels(rows.size());
    if (doc.contains("f") && !doc.at("f").is_null()) f = Observable(doc.at("f").get<std::vector<double>>());
  } catch (const json::exception& e) {
    throw Error(Errc::ParseError, e.what());
  }
  TransitionMatrix p = build_transition(rows, std::move(labels));
  if (f && f->size() != p.size())
    throw Error(Errc::LengthMismatch, "f has " + std::to_string(f->size()) + " entries for " +
                                          std::to_string(p.size()) + " states");
  return {std::move(p), std::move(f)};
}

ChainFile load_chain(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::FileNotFound, "cannot open '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_chain(buf.str());
}

std::string chain_to_json(const TransitionMatrix& p, const std::optional<Observable>& f) {
  json doc;
  doc["labels"] = p.labels();
  json rows = json::array();
  for (std::size_t i = 0; i < p.size(); ++i) {
    auto r = p.row(i);
    rows.push_back(std::vector<double>(r.begin(), r.end()));
  }
  doc["P"] = std::move(rows);
  if (f) doc["f"] = std::vector<double>(f->values().begin(), f->values().end());
  return doc.dump(2);
}

}  // namespace mclt::cli
