#include "perseus/io_formats.hpp"

#include "perseus/detail/text.hpp"

#include <json.hpp>

#include <cstdint>
#include <fstream>
#include <sstream>

namespace perseus {

using nlohmann::json;

namespace {

json load_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw parse_error("cannot open " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw parse_error(path + ": " + e.what());
  }
  return j;
}

std::vector<Edge> edges_from_json(const json& arr, const std::string& where) {
  std::vector<Edge> out;
  if (!arr.is_array()) throw parse_error(where + ": expected an array");
  for (const auto& item : arr) {
    if (!item.is_array() || item.size() != 2) {
      throw parse_error(where + ": each entry must be a [u,v] pair");
    }
    out.push_back(make_edge(item[0].get<int>(), item[1].get<int>()));
  }
  std::sort(out.begin(), out.end());
  return out;
}

json edges_to_json(const std::vector<Edge>& edges) {
  json arr = json::array();
  for (const auto& e : edges) arr.push_back({e.first, e.second});
  return arr;
}

}  // namespace

void save_splits(const std::string& path, const SplitMasks& masks) {
  json j;
  j["train"] = masks.train;
  j["val"] = masks.val;
  j["test"] = masks.test;
  detail::write_file(path, j.dump(2) + "\n");
}

SplitMasks load_splits(const std::string& path) {
  const json j = load_json(path);
  SplitMasks masks;
  for (const char* key : {"train", "val", "test"}) {
    if (!j.contains(key)) {
      throw parse_error(path + ": missing \"" + key + "\" array");
    }
  }
  masks.train = j["train"].get<std::vector<int>>();
  masks.val = j["val"].get<std::vector<int>>();
  masks.test = j["test"].get<std::vector<int>>();
  std::sort(masks.train.begin(), masks.train.end());
  std::sort(masks.val.begin(), masks.val.end());
  std::sort(masks.test.begin(), masks.test.end());
  return masks;
}

void save_record(const std::string& path, const PerturbationRecord& rec) {
  json j;
  j["rate"] = rec.rate;
  j["added"] = edges_to_json(rec.added);
  j["removed"] = edges_to_json(rec.removed);
  detail::write_file(path, j.dump(2) + "\n");
}

PerturbationRecord load_record(const std::string& path) {
  const json j = load_json(path);
  PerturbationRecord rec;
  if (!j.contains("rate") || !j["rate"].is_number()) {
    throw parse_error(path + ": missing numeric \"rate\"");
  }
  rec.rate = j["rate"].get<double>();
  rec.added = edges_from_json(j.value("added", json::array()), path + ": added");
  rec.removed =
      edges_from_json(j.value("removed", json::array()), path + ": removed");
  return rec;
}

void save_scores(const std::string& path, const EdgeScoreTable& table) {
  std::ostringstream out;
  out << "u,v,score,rank\n";
  int rank = 1;
  for (const auto& e : table.ranking) {
    out << e.first << ',' << e.second << ','
        << detail::fmt_real(table.scores.at(e)) << ',' << rank++ << '\n';
  }
  detail::write_file(path, out.str());
}

void save_curve(const std::string& path, const RatioCurve& curve) {
  std::ostringstream out;
  out << "r,k,r_p,r_o\n";
  for (std::size_t i = 0; i < curve.grid.size(); ++i) {
    out << detail::fmt_real(curve.grid[i]) << ',' << curve.k[i] << ','
        << detail::fmt_real(curve.r_p[i]) << ','
        << detail::fmt_real(curve.r_o[i]) << '\n';
  }
  detail::write_file(path, out.str());
}

void save_epochs(const std::string& path, const std::vector<EpochRow>& rows) {
  std::ostringstream out;
  out << "stage,epoch,train_loss,val_loss,val_acc\n";
  for (const auto& r : rows) {
    out << r.stage << ',' << r.epoch << ',' << detail::fmt_real(r.train_loss)
        << ',' << detail::fmt_real(r.val_loss) << ','
        << detail::fmt_real(r.val_acc) << '\n';
  }
  detail::write_file(path, out.str());
}

void save_stages(const std::string& path, const std::vector<StageLog>& stages) {
  std::ostringstream out;
  for (const auto& s : stages) {
    json j;
    j["stage"] = s.stage;
    j["r"] = s.r;
    j["k"] = s.k;
    j["new_edges"] = s.new_edges;
    j["val_loss_at_advance"] = s.val_loss_at_advance;
    out << j.dump() << '\n';
  }
  detail::write_file(path, out.str());
}

void save_params(const std::string& path, const ModelParams& params) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw parse_error("cannot open " + path + " for writing");
  const auto put_u64 = [&out](std::uint64_t v) {
    out.write(reinterpret_cast<const char*>(&v), sizeof(v));
  };
  const auto put_mat = [&](const Matd& m) {
    put_u64(static_cast<std::uint64_t>(m.rows()));
    put_u64(static_cast<std::uint64_t>(m.cols()));
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
      for (Eigen::Index j = 0; j < m.cols(); ++j) {
        const double v = m(i, j);
        out.write(reinterpret_cast<const char*>(&v), sizeof(v));
      }
    }
  };
  put_u64(2);
  put_mat(params.W1);
  put_mat(params.W2);
  if (!out) throw parse_error("short write to " + path);
}

ModelParams load_params(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw parse_error("cannot open " + path);
  const auto get_u64 = [&in, &path]() {
    std::uint64_t v = 0;
    in.read(reinterpret_cast<char*>(&v), sizeof(v));
    if (!in) throw parse_error(path + ": truncated header");
    return v;
  };
  const auto get_mat = [&](Matd& m) {
    const auto rows = get_u64();
    const auto cols = get_u64();
    if (rows > (1u << 24) || cols > (1u << 24)) {
      throw parse_error(path + ": implausible matrix shape");
    }
    m.resize(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
      for (Eigen::Index j = 0; j < m.cols(); ++j) {
        double v = 0;
        in.read(reinterpret_cast<char*>(&v), sizeof(v));
        if (!in) throw parse_error(path + ": truncated matrix data");
        m(i, j) = v;
      }
    }
  };
  if (get_u64() != 2) {
    throw parse_error(path + ": expected exactly two weight matrices");
  }
  ModelParams params;
  get_mat(params.W1);
  get_mat(params.W2);
  return params;
}

}  // namespace perseus
