#include "swrm/checkpoint.h"

#include <fstream>
#include <nlohmann/json.hpp>
#include <set>

#include "swrm/errors.h"

namespace swrm {
namespace {

constexpr const char* kFormat = "swrm-checkpoint";
constexpr int kVersion = 1;

}  // namespace

void save_checkpoint(const std::filesystem::path& path, const SwrmModel& model,
                     std::uint64_t seed, const std::string& adapter) {
  nlohmann::ordered_json j;
  j["format"] = kFormat;
  j["version"] = kVersion;
  j["config"] = nlohmann::ordered_json::parse(model_config_to_json(model.config()));
  j["config_hash"] = config_hash(model.config());
  j["seed"] = seed;
  j["adapter"] = adapter;
  nlohmann::ordered_json tensors = nlohmann::ordered_json::object();
  model.visit(ConstParamVisitor([&tensors](const std::string& name, const Parameter& p) {
    std::vector<double> data(static_cast<std::size_t>(p.value.size()));
    // Row-major on disk.
    for (Eigen::Index r = 0; r < p.value.rows(); ++r) {
      for (Eigen::Index c = 0; c < p.value.cols(); ++c) {
        data[static_cast<std::size_t>(r * p.value.cols() + c)] = p.value(r, c);
      }
    }
    tensors[name] = {{"rows", p.value.rows()}, {"cols", p.value.cols()}, {"data", data}};
  }));
  j["tensors"] = std::move(tensors);

  std::ofstream out(path);
  if (!out) throw Error("cannot write checkpoint " + path.string());
  out << j.dump() << '\n';
  if (!out) throw Error("failed writing checkpoint " + path.string());
}

Checkpoint load_checkpoint(const std::filesystem::path& path,
                           const std::optional<ModelConfig>& expected) {
  std::ifstream in(path);
  if (!in) throw LoadError(0, "cannot open checkpoint " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw LoadError(1, "checkpoint " + path.string() + ": " + e.what());
  }
  if (j.value("format", std::string()) != kFormat) {
    throw LoadError(1, path.string() + " is not a checkpoint");
  }
  if (j.value("version", 0) != kVersion) {
    throw LoadError(1, "unsupported checkpoint version in " + path.string());
  }

  Checkpoint ck;
  ModelConfig config;
  try {
    config = model_config_from_json(j.at("config").dump());
    ck.config_hash = j.at("config_hash").get<std::string>();
    ck.seed = j.at("seed").get<std::uint64_t>();
    ck.adapter = j.value("adapter", std::string());
  } catch (const nlohmann::json::exception& e) {
    throw SchemaError(std::string("checkpoint header: ") + e.what());
  }
  if (config_hash(config) != ck.config_hash) {
    throw ConfigError("checkpoint " + path.string() +
                      ": stored config hash does not match its config");
  }
  if (expected && config_hash(*expected) != ck.config_hash) {
    throw ConfigError("checkpoint " + path.string() + " was trained with config " +
                      ck.config_hash + " but the current config hashes to " +
                      config_hash(*expected) + "; refusing to evaluate");
  }

  ck.model = SwrmModel(config, 0);
  const nlohmann::json& tensors = j.at("tensors");
  std::set<std::string> seen;
  ck.model.visit(ParamVisitor([&](const std::string& name, Parameter& p) {
    if (!tensors.contains(name)) throw SchemaError("checkpoint is missing tensor " + name);
    const nlohmann::json& t = tensors.at(name);
    const auto rows = t.at("rows").get<Eigen::Index>();
    const auto cols = t.at("cols").get<Eigen::Index>();
    const auto data = t.at("data").get<std::vector<double>>();
    if (rows != p.value.rows() || cols != p.value.cols() ||
        data.size() != static_cast<std::size_t>(rows * cols)) {
      throw SchemaError("checkpoint tensor " + name + " has the wrong shape");
    }
    for (Eigen::Index r = 0; r < rows; ++r) {
      for (Eigen::Index c = 0; c < cols; ++c) {
        p.value(r, c) = data[static_cast<std::size_t>(r * cols + c)];
      }
    }
    p.zero_grad();
    seen.insert(name);
  }));
  if (seen.size() != tensors.size()) throw SchemaError("checkpoint has unexpected tensors");
  return ck;
}

}  // namespace swrm
