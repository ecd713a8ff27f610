#include "swrm/model.h"

#include <nlohmann/json.hpp>

#include "swrm/errors.h"
#include "swrm/hashing.h"

namespace swrm {

using nlohmann::json;

ModelConfig preset_config(std::string_view name) {
  ModelConfig c;
  if (name == "mosi-speechbrain" || name == "mosi-iflytek") {
    c.d_h_v = 16;
    c.d_h_a = 32;
    c.d_h_va = 48;
    c.d_v_l = 32;
    c.d_v_a = 16;
    c.d_v_v = 32;
    c.d_v_f = 128;
  } else if (name == "mosi-ibm") {
    c.d_h_v = 32;
    c.d_h_a = 32;
    c.d_h_va = 64;
    c.d_v_l = 64;
    c.d_v_a = 32;
    c.d_v_v = 16;
    c.d_v_f = 64;
  } else {
    throw ConfigError("unknown preset '" + std::string(name) +
                      "' (expected mosi-speechbrain, mosi-ibm or mosi-iflytek)");
  }
  return c;
}

std::size_t preset_batch_size(std::string_view name) {
  preset_config(name);
  return name == "mosi-ibm" ? 128 : 64;
}

void validate_model_config(const ModelConfig& c) {
  const std::pair<const char*, Eigen::Index> sizes[] = {
      {"d_x", c.d_x},         {"visual_dim", c.visual_dim}, {"acoustic_dim", c.acoustic_dim},
      {"d_h_v", c.d_h_v},     {"d_h_a", c.d_h_a},           {"d_h_va", c.d_h_va},
      {"d_v_l", c.d_v_l},     {"d_v_a", c.d_v_a},           {"d_v_v", c.d_v_v},
      {"d_v_f", c.d_v_f}};
  for (const auto& [name, value] : sizes) {
    if (value <= 0) throw ConfigError(std::string("model config: ") + name + " must be positive");
  }
  if (c.ffn_dim < 0) throw ConfigError("model config: ffn_dim must be non-negative");
  if (c.k < 1) throw ConfigError("model config: k must be at least 1");
  if (c.task_weights.l < 0 || c.task_weights.v < 0 || c.task_weights.a < 0) {
    throw ConfigError("model config: task weights must be non-negative");
  }
}

std::string model_config_to_json(const ModelConfig& c) {
  json j;
  j["d_x"] = c.d_x;
  j["visual_dim"] = c.visual_dim;
  j["acoustic_dim"] = c.acoustic_dim;
  j["ffn_dim"] = c.effective_ffn_dim();
  j["d_h_v"] = c.d_h_v;
  j["d_h_a"] = c.d_h_a;
  j["d_h_va"] = c.d_h_va;
  j["d_v_l"] = c.d_v_l;
  j["d_v_a"] = c.d_v_a;
  j["d_v_v"] = c.d_v_v;
  j["d_v_f"] = c.d_v_f;
  j["k"] = c.k;
  j["pooling"] = std::string(to_string(c.pooling));
  j["ablations"] = {{"no_position", c.ablations.no_position},
                    {"no_attention", c.ablations.no_attention},
                    {"no_multimodal", c.ablations.no_multimodal}};
  j["task_weights"] = {{"l", c.task_weights.l}, {"v", c.task_weights.v}, {"a", c.task_weights.a}};
  return j.dump();
}

ModelConfig model_config_from_json(std::string_view text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("model config: ") + e.what());
  }
  ModelConfig c;
  try {
    c.d_x = j.at("d_x").get<Eigen::Index>();
    c.visual_dim = j.at("visual_dim").get<Eigen::Index>();
    c.acoustic_dim = j.at("acoustic_dim").get<Eigen::Index>();
    c.ffn_dim = j.value("ffn_dim", Eigen::Index{0});
    c.d_h_v = j.at("d_h_v").get<Eigen::Index>();
    c.d_h_a = j.at("d_h_a").get<Eigen::Index>();
    c.d_h_va = j.at("d_h_va").get<Eigen::Index>();
    c.d_v_l = j.at("d_v_l").get<Eigen::Index>();
    c.d_v_a = j.at("d_v_a").get<Eigen::Index>();
    c.d_v_v = j.at("d_v_v").get<Eigen::Index>();
    c.d_v_f = j.at("d_v_f").get<Eigen::Index>();
    c.k = j.value("k", std::size_t{50});
    c.pooling = parse_pooling(j.value("pooling", std::string("first")));
    if (j.contains("ablations")) {
      const json& a = j.at("ablations");
      c.ablations.no_position = a.value("no_position", false);
      c.ablations.no_attention = a.value("no_attention", false);
      c.ablations.no_multimodal = a.value("no_multimodal", false);
    }
    if (j.contains("task_weights")) {
      const json& w = j.at("task_weights");
      c.task_weights = {w.value("l", 1.0), w.value("v", 1.0), w.value("a", 1.0)};
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("model config: ") + e.what());
  }
  validate_model_config(c);
  return c;
}

std::string config_hash(const ModelConfig& config) {
  return to_hex64(fnv1a64(model_config_to_json(config)));
}

PreparedSample prepare_sample(const Utterance& u, const LmAdapter& lm,
                              const SentimentLexicon& lexicon, const ModelConfig& config) {
  if (lm.dim() != config.d_x) {
    throw ConfigError("adapter embedding width " + std::to_string(lm.dim()) +
                      " does not match d_x " + std::to_string(config.d_x));
  }
  if (u.visual.cols() != config.visual_dim || u.acoustic.cols() != config.acoustic_dim) {
    throw ConfigError("utterance '" + u.id + "': feature widths do not match the model config");
  }
  PreparedSample s;
  s.id = u.id;
  s.label = u.label;
  s.x_l = embed_tokens(lm, u.tokens);
  const auto n_l = static_cast<Eigen::Index>(u.tokens.size());
  s.u_v = pseudo_align(u.visual, n_l);
  s.u_a = pseudo_align(u.acoustic, n_l);
  s.x_v = u.visual;
  s.x_a = u.acoustic;
  s.mask_embedding = lm.mask_embedding();
  if (!config.ablations.no_position) {
    s.detection = detect(u.tokens, lm, lexicon, config.k);
    const auto& cands = s.detection.candidate_set.candidates;
    s.candidate_embeddings.resize(static_cast<Eigen::Index>(cands.size()), lm.dim());
    for (std::size_t t = 0; t < cands.size(); ++t) {
      s.candidate_embeddings.row(static_cast<Eigen::Index>(t)) = lm.embed_token(cands[t].token);
    }
  }
  return s;
}

std::vector<PreparedSample> prepare_split(const DatasetSplit& split, const LmAdapter& lm,
                                          const SentimentLexicon& lexicon,
                                          const ModelConfig& config) {
  std::vector<PreparedSample> out;
  out.reserve(split.utterances.size());
  for (const Utterance& u : split.utterances) {
    out.push_back(prepare_sample(u, lm, lexicon, config));
  }
  return out;
}

SwrmModel::SwrmModel(const ModelConfig& config, std::uint64_t seed) : config_(config) {
  validate_model_config(config_);
  Rng text_rng(derive_seed(seed, "text_encoder"));
  Rng ctx_rng(derive_seed(seed, "context_encoders"));
  Rng ref_rng(derive_seed(seed, "refiner"));
  Rng fus_rng(derive_seed(seed, "fusion"));
  text_ = TextEncoder(config_.d_x, config_.effective_ffn_dim(), text_rng);
  contexts_ = ContextEncoders(config_.visual_dim, config_.acoustic_dim, config_.d_h_v,
                              config_.d_h_a, config_.d_h_va, ctx_rng);
  refiner_ = RefinerParams(config_.refiner_dims(), ref_rng);
  fusion_ = FusionParams(config_.fusion_dims(), fus_rng);
}

graph::StatesVars SwrmModel::states(Tape& tape, const PreparedSample& sample,
                                    const Var& x_l) const {
  graph::StatesVars st = graph::encode_contexts(tape, text_, contexts_, x_l,
                                                tape.constant(sample.u_v),
                                                tape.constant(sample.u_a));
  if (config_.ablations.no_multimodal) {
    st.h_v = tape.constant(Matrix::Zero(st.h_v.rows(), st.h_v.cols()));
    st.h_a = tape.constant(Matrix::Zero(st.h_a.rows(), st.h_a.cols()));
    st.h_va = tape.constant(Matrix::Zero(st.h_va.rows(), st.h_va.cols()));
  }
  tape.label(st.h_l, "states.h_l");
  tape.label(st.h_v, "states.h_v");
  tape.label(st.h_a, "states.h_a");
  tape.label(st.h_va, "states.h_va");
  return st;
}

SwrmModel::ForwardVars SwrmModel::forward(Tape& tape, const PreparedSample& sample,
                                          bool refine) const {
  ForwardVars out;
  const Var x_l = tape.constant(sample.x_l);
  Var z_l = x_l;
  if (refine) {
    const graph::StatesVars st = states(tape, sample, x_l);
    const Var cands = sample.candidate_embeddings.rows() > 0
                          ? tape.constant(sample.candidate_embeddings)
                          : Var();
    out.refine = graph::refine_sequence(tape, refiner_, x_l, sample.detection, st, cands,
                                        tape.constant(sample.mask_embedding), config_.ablations);
    z_l = out.refine.z_l;
    tape.label(z_l, "refiner.z_l");
  }
  out.fusion = graph::fuse(tape, text_, z_l, tape.constant(sample.x_v),
                           tape.constant(sample.x_a), fusion_, config_.pooling);
  out.prediction = graph::predict(tape, out.fusion, fusion_);
  return out;
}

namespace {

Prediction to_prediction(const graph::PredictionVars& p) {
  return {p.p_f.scalar(), p.p_l.scalar(), p.p_v.scalar(), p.p_a.scalar()};
}

}  // namespace

Prediction SwrmModel::predict(const PreparedSample& sample) const {
  Tape tape;
  return to_prediction(forward(tape, sample, true).prediction);
}

Prediction SwrmModel::predict_baseline(const PreparedSample& sample) const {
  Tape tape;
  return to_prediction(forward(tape, sample, false).prediction);
}

RefinementResult SwrmModel::refine(const PreparedSample& sample) const {
  Tape tape;
  const Var x_l = tape.constant(sample.x_l);
  const graph::StatesVars st = states(tape, sample, x_l);
  const Var cands = sample.candidate_embeddings.rows() > 0
                        ? tape.constant(sample.candidate_embeddings)
                        : Var();
  graph::RefineVars r = graph::refine_sequence(tape, refiner_, x_l, sample.detection, st, cands,
                                               tape.constant(sample.mask_embedding),
                                               config_.ablations);
  return {r.z_l.value(), std::move(r.traces)};
}

void SwrmModel::visit(const ParamVisitor& fn) {
  text_.visit("text", fn);
  contexts_.visit("context", fn);
  refiner_.visit("refiner", fn);
  fusion_.visit("fusion", fn);
}

void SwrmModel::visit(const ConstParamVisitor& fn) const {
  text_.visit("text", fn);
  contexts_.visit("context", fn);
  refiner_.visit("refiner", fn);
  fusion_.visit("fusion", fn);
}

std::size_t SwrmModel::parameter_count() const {
  std::size_t n = 0;
  visit(ConstParamVisitor([&n](const std::string&, const Parameter& p) {
    n += static_cast<std::size_t>(p.value.size());
  }));
  return n;
}

}  // namespace swrm
