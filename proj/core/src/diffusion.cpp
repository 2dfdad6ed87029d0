#include "seqgrasp/diffusion.hpp"

#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include <json.hpp>

#include "seqgrasp/errors.hpp"
#include "seqgrasp/random.hpp"

namespace seqgrasp {

using nlohmann::json;

NoiseSchedule NoiseSchedule::linear(int t_steps, double beta_start, double beta_end) {
  NoiseSchedule s;
  s.t_steps = t_steps;
  s.beta.resize(t_steps);
  s.alpha.resize(t_steps);
  s.alpha_bar.resize(t_steps);
  double prod = 1.0;
  for (int t = 0; t < t_steps; ++t) {
    s.beta[t] = t_steps > 1 ? beta_start + (beta_end - beta_start) * t / (t_steps - 1)
                            : beta_start;
    s.alpha[t] = 1.0 - s.beta[t];
    prod *= s.alpha[t];
    s.alpha_bar[t] = prod;
  }
  s.check();
  return s;
}

void NoiseSchedule::check() const {
  if (t_steps < 1 || beta.size() != t_steps) {
    throw InvariantViolation("noise schedule: beta length must equal t_steps >= 1");
  }
  for (int t = 0; t < t_steps; ++t) {
    if (!(beta[t] > 0.0 && beta[t] < 1.0)) {
      throw InvariantViolation("noise schedule: beta out of (0, 1)");
    }
    if (t > 0 && !(beta[t] > beta[t - 1])) {
      throw InvariantViolation("noise schedule: beta must be strictly increasing");
    }
    if (t > 0 && !(alpha_bar[t] < alpha_bar[t - 1])) {
      throw InvariantViolation("noise schedule: alpha_bar must be strictly decreasing");
    }
  }
  if (std::abs(alpha_bar[0] - alpha[0]) > 1e-15) {
    throw InvariantViolation("noise schedule: alpha_bar(1) must equal alpha(1)");
  }
}

// --- configuration coding -------------------------------------------------

namespace {
void write_rotation(Eigen::VectorXd& x, int offset, const Mat3& r) {
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) x[offset + 3 * i + j] = r(i, j);
  }
}
Mat3 read_rotation(const Eigen::VectorXd& x, int offset) {
  Mat3 r;
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) r(i, j) = x[offset + 3 * i + j];
  }
  return r;
}
}  // namespace

Eigen::VectorXd ConfigCodec::flatten(const MultiGraspRecord& rec) const {
  Eigen::VectorXd x(dim());
  x.head(dof) = rec.theta;
  x.segment<3>(dof) = rec.object1_in_hand.translation;
  write_rotation(x, dof + 3, rec.object1_in_hand.rotation);
  x.segment<3>(dof + 12) = rec.object2_in_hand.translation;
  write_rotation(x, dof + 15, rec.object2_in_hand.rotation);
  return x;
}

ConfigCodec ConfigCodec::fit(int dof, const std::vector<MultiGraspRecord>& records) {
  ConfigCodec c;
  c.dof = dof;
  const int d = c.dim();
  c.mean = Eigen::VectorXd::Zero(d);
  c.stddev = Eigen::VectorXd::Ones(d);
  if (records.empty()) return c;

  Eigen::MatrixXd xs(d, records.size());
  for (std::size_t i = 0; i < records.size(); ++i) xs.col(i) = c.flatten(records[i]);
  c.mean = xs.rowwise().mean();
  for (int k = 0; k < d; ++k) {
    const double var = (xs.row(k).array() - c.mean[k]).square().mean();
    c.stddev[k] = std::max(std::sqrt(var), 1e-6);
  }
  // Rotation entries are already O(1); keep them unnormalized.
  for (int k = 0; k < 9; ++k) {
    c.mean[dof + 3 + k] = 0.0;
    c.stddev[dof + 3 + k] = 1.0;
    c.mean[dof + 15 + k] = 0.0;
    c.stddev[dof + 15 + k] = 1.0;
  }
  return c;
}

Eigen::VectorXd ConfigCodec::encode(const MultiGraspRecord& rec) const {
  return (flatten(rec) - mean).cwiseQuotient(stddev);
}

MultiGraspRecord ConfigCodec::decode(const Eigen::VectorXd& x_norm) const {
  if (x_norm.size() != dim()) {
    throw std::invalid_argument("ConfigCodec::decode: dimension mismatch");
  }
  const Eigen::VectorXd x = mean + stddev.cwiseProduct(x_norm);
  MultiGraspRecord rec;
  rec.theta = x.head(dof);
  rec.object1_in_hand.translation = x.segment<3>(dof);
  rec.object1_in_hand.rotation = project_rotation(read_rotation(x, dof + 3));
  rec.object2_in_hand.translation = x.segment<3>(dof + 12);
  rec.object2_in_hand.rotation = project_rotation(read_rotation(x, dof + 15));
  return rec;
}

// --- MLP -------------------------------------------------------------------

Mlp::Mlp(const std::vector<int>& dims, RandomStream& rng) {
  for (std::size_t l = 0; l + 1 < dims.size(); ++l) {
    Eigen::MatrixXd wl(dims[l + 1], dims[l]);
    const double scale = std::sqrt(2.0 / dims[l]);
    for (int i = 0; i < wl.rows(); ++i) {
      for (int j = 0; j < wl.cols(); ++j) wl(i, j) = scale * rng.normal();
    }
    w.push_back(std::move(wl));
    b.push_back(Eigen::VectorXd::Zero(dims[l + 1]));
  }
}

Eigen::MatrixXd Mlp::forward(const Eigen::MatrixXd& x) const {
  Eigen::MatrixXd h = x;
  for (std::size_t l = 0; l < w.size(); ++l) {
    h = (w[l] * h).colwise() + b[l];
    if (l + 1 < w.size()) h = h.cwiseMax(0.0);
  }
  return h;
}

Eigen::MatrixXd Mlp::forward_cached(const Eigen::MatrixXd& x,
                                    std::vector<Eigen::MatrixXd>& acts) const {
  acts.clear();
  acts.push_back(x);
  for (std::size_t l = 0; l < w.size(); ++l) {
    Eigen::MatrixXd h = (w[l] * acts.back()).colwise() + b[l];
    if (l + 1 < w.size()) h = h.cwiseMax(0.0);
    acts.push_back(std::move(h));
  }
  return acts.back();
}

Eigen::MatrixXd Mlp::backward(const std::vector<Eigen::MatrixXd>& acts,
                              const Eigen::MatrixXd& dout, MlpGrads& grads) const {
  Eigen::MatrixXd delta = dout;
  for (int l = static_cast<int>(w.size()) - 1; l >= 0; --l) {
    if (l + 1 < static_cast<int>(w.size())) {
      // ReLU mask from the cached post-activation values.
      delta = delta.cwiseProduct((acts[l + 1].array() > 0.0).cast<double>().matrix());
    }
    grads.dw[l] += delta * acts[l].transpose();
    grads.db[l] += delta.rowwise().sum();
    if (l > 0) delta = w[l].transpose() * delta;
  }
  return w[0].transpose() * delta;
}

MlpGrads Mlp::zero_grads() const {
  MlpGrads g;
  for (std::size_t l = 0; l < w.size(); ++l) {
    g.dw.push_back(Eigen::MatrixXd::Zero(w[l].rows(), w[l].cols()));
    g.db.push_back(Eigen::VectorXd::Zero(b[l].size()));
  }
  return g;
}

// --- diffusion primitives ---------------------------------------------------

Eigen::VectorXd forward_noise(const Eigen::VectorXd& x0, int t, const Eigen::VectorXd& xi,
                              const NoiseSchedule& schedule) {
  if (t < 1 || t > schedule.t_steps) {
    throw std::invalid_argument("forward_noise: step t out of [1, T]");
  }
  const double ab = schedule.alpha_bar[t - 1];
  return std::sqrt(ab) * x0 + std::sqrt(1.0 - ab) * xi;
}

Eigen::VectorXd time_embedding(int t, int dim) {
  Eigen::VectorXd emb(dim);
  const int half = dim / 2;
  for (int k = 0; k < half; ++k) {
    const double omega = std::pow(10000.0, -static_cast<double>(k) / half);
    emb[2 * k] = std::sin(t * omega);
    emb[2 * k + 1] = std::cos(t * omega);
  }
  if (dim % 2 == 1) emb[dim - 1] = 0.0;
  return emb;
}

namespace {

struct PooledCode {
  Eigen::VectorXd code;
  std::vector<int> argmax;             // winning point per code dimension
  std::vector<Eigen::MatrixXd> acts;   // encoder activations for backward
};

PooledCode encode_cloud_cached(const Eigen::MatrixXd& points, const Mlp& encoder) {
  PooledCode out;
  const Eigen::MatrixXd feats = encoder.forward_cached(points, out.acts);
  out.code.resize(feats.rows());
  out.argmax.resize(feats.rows());
  for (int r = 0; r < feats.rows(); ++r) {
    int idx = 0;
    out.code[r] = feats.row(r).maxCoeff(&idx);
    out.argmax[r] = idx;
  }
  return out;
}

}  // namespace

Eigen::VectorXd encode_pointcloud(const Eigen::MatrixXd& points, const Mlp& encoder) {
  if (points.cols() < 1 || points.rows() != 3) {
    throw std::invalid_argument("encode_pointcloud: need a 3 x n cloud with n >= 1");
  }
  return encode_cloud_cached(points, encoder).code;
}

double diffusion_loss(const DenoiserParams& params, const std::vector<TrainingExample>& data,
                      const NoisedBatch& batch, DiffusionGrads* grads) {
  const int bsize = static_cast<int>(batch.example_index.size());
  const int d = params.codec.dim();
  const int temb_dim = params.hyper.time_embedding_dim;
  const int cond_dim = params.condition_dim();
  const int in_dim = d + temb_dim + cond_dim;
  const double scale = params.hyper.cloud_scale;

  // Encode each distinct example's clouds once per batch.
  std::map<int, std::pair<PooledCode, PooledCode>> codes;
  for (int idx : batch.example_index) {
    if (!codes.count(idx)) {
      const TrainingExample& ex = data.at(idx);
      codes.emplace(idx, std::make_pair(encode_cloud_cached(scale * ex.cloud1, params.encoder),
                                        encode_cloud_cached(scale * ex.cloud2, params.encoder)));
    }
  }

  Eigen::MatrixXd input(in_dim, bsize);
  Eigen::MatrixXd target(d, bsize);
  for (int k = 0; k < bsize; ++k) {
    const int idx = batch.example_index[k];
    const Eigen::VectorXd x0 = params.codec.encode(data.at(idx).record);
    input.col(k).head(d) = forward_noise(x0, batch.t[k], batch.xi.col(k), params.schedule);
    input.col(k).segment(d, temb_dim) = time_embedding(batch.t[k], temb_dim);
    const auto& pc = codes.at(idx);
    input.col(k).segment(d + temb_dim, cond_dim / 2) = pc.first.code;
    input.col(k).segment(d + temb_dim + cond_dim / 2, cond_dim / 2) = pc.second.code;
    target.col(k) = batch.xi.col(k);
  }

  std::vector<Eigen::MatrixXd> acts;
  const Eigen::MatrixXd out = params.denoiser.forward_cached(input, acts);
  const Eigen::MatrixXd err = out - target;
  const double loss = err.squaredNorm() / (static_cast<double>(d) * bsize);
  if (!std::isfinite(loss)) {
    throw DataError("diffusion: non-finite training loss");
  }
  if (!grads) return loss;

  const Eigen::MatrixXd dout = 2.0 / (static_cast<double>(d) * bsize) * err;
  const Eigen::MatrixXd dinput = params.denoiser.backward(acts, dout, grads->denoiser);

  // Route condition gradients through the max pool to the winning points.
  std::map<int, std::pair<Eigen::VectorXd, Eigen::VectorXd>> dcode;
  for (int k = 0; k < bsize; ++k) {
    const int idx = batch.example_index[k];
    auto& dc = dcode.try_emplace(idx, Eigen::VectorXd::Zero(cond_dim / 2),
                                 Eigen::VectorXd::Zero(cond_dim / 2)).first->second;
    dc.first += dinput.col(k).segment(d + temb_dim, cond_dim / 2);
    dc.second += dinput.col(k).segment(d + temb_dim + cond_dim / 2, cond_dim / 2);
  }
  for (const auto& [idx, dc] : dcode) {
    const auto& pc = codes.at(idx);
    for (int half = 0; half < 2; ++half) {
      const PooledCode& code = half == 0 ? pc.first : pc.second;
      const Eigen::VectorXd& dvec = half == 0 ? dc.first : dc.second;
      Eigen::MatrixXd dfeat =
          Eigen::MatrixXd::Zero(cond_dim / 2, code.acts.front().cols());
      for (int r = 0; r < dvec.size(); ++r) dfeat(r, code.argmax[r]) = dvec[r];
      params.encoder.backward(code.acts, dfeat, grads->encoder);
    }
  }
  return loss;
}

// --- training ----------------------------------------------------------------

namespace {

struct AdamState {
  std::vector<Eigen::MatrixXd> mw, vw;
  std::vector<Eigen::VectorXd> mb, vb;
  explicit AdamState(const Mlp& net) {
    for (std::size_t l = 0; l < net.w.size(); ++l) {
      mw.push_back(Eigen::MatrixXd::Zero(net.w[l].rows(), net.w[l].cols()));
      vw.push_back(Eigen::MatrixXd::Zero(net.w[l].rows(), net.w[l].cols()));
      mb.push_back(Eigen::VectorXd::Zero(net.b[l].size()));
      vb.push_back(Eigen::VectorXd::Zero(net.b[l].size()));
    }
  }

  void update(Mlp& net, const MlpGrads& g, double lr, long step) {
    constexpr double b1 = 0.9, b2 = 0.999, eps = 1e-8;
    const double c1 = 1.0 - std::pow(b1, static_cast<double>(step));
    const double c2 = 1.0 - std::pow(b2, static_cast<double>(step));
    for (std::size_t l = 0; l < net.w.size(); ++l) {
      mw[l] = b1 * mw[l] + (1 - b1) * g.dw[l];
      vw[l] = b2 * vw[l].array().matrix() + (1 - b2) * g.dw[l].cwiseProduct(g.dw[l]);
      net.w[l] -= lr * (mw[l] / c1).cwiseQuotient(((vw[l] / c2).cwiseSqrt().array() + eps).matrix());
      mb[l] = b1 * mb[l] + (1 - b1) * g.db[l];
      vb[l] = b2 * vb[l] + (1 - b2) * g.db[l].cwiseProduct(g.db[l]);
      net.b[l] -= lr * (mb[l] / c1).cwiseQuotient(((vb[l] / c2).cwiseSqrt().array() + eps).matrix());
    }
  }
};

}  // namespace

DenoiserParams train(const std::vector<TrainingExample>& dataset, const NoiseSchedule& schedule,
                     const DiffusionHyperparams& hyper, std::uint64_t seed,
                     std::vector<double>* loss_trace, std::uint64_t dataset_fingerprint) {
  if (dataset.empty()) throw DataError("diffusion train: empty dataset");
  schedule.check();

  const int dof = static_cast<int>(dataset.front().record.theta.size());
  DenoiserParams params;
  params.schedule = schedule;
  params.hyper = hyper;
  params.dataset_fingerprint = dataset_fingerprint;

  std::vector<MultiGraspRecord> records;
  records.reserve(dataset.size());
  for (const auto& ex : dataset) records.push_back(ex.record);
  params.codec = ConfigCodec::fit(dof, records);

  RandomStream rng(RandomStream::splitmix64(seed ^ 0xd1ff5eedULL));
  std::vector<int> enc_dims = {3};
  enc_dims.insert(enc_dims.end(), hyper.encoder_hidden.begin(), hyper.encoder_hidden.end());
  params.encoder = Mlp(enc_dims, rng);

  const int d = params.codec.dim();
  std::vector<int> den_dims = {d + hyper.time_embedding_dim + params.condition_dim()};
  den_dims.insert(den_dims.end(), hyper.denoiser_hidden.begin(), hyper.denoiser_hidden.end());
  den_dims.push_back(d);
  params.denoiser = Mlp(den_dims, rng);

  AdamState adam_enc(params.encoder);
  AdamState adam_den(params.denoiser);

  for (int step = 1; step <= hyper.train_steps; ++step) {
    NoisedBatch batch;
    batch.xi.resize(d, hyper.batch_size);
    for (int k = 0; k < hyper.batch_size; ++k) {
      batch.example_index.push_back(static_cast<int>(rng.uniform_index(dataset.size())));
      batch.t.push_back(1 + static_cast<int>(rng.uniform_index(schedule.t_steps)));
      for (int i = 0; i < d; ++i) batch.xi(i, k) = rng.normal();
    }
    DiffusionGrads grads{params.encoder.zero_grads(), params.denoiser.zero_grads()};
    const double loss = diffusion_loss(params, dataset, batch, &grads);
    if (loss_trace) loss_trace->push_back(loss);
    adam_enc.update(params.encoder, grads.encoder, hyper.learning_rate, step);
    adam_den.update(params.denoiser, grads.denoiser, hyper.learning_rate, step);
  }
  return params;
}

std::vector<MultiGraspRecord> sample(const DenoiserParams& params, const Eigen::MatrixXd& cloud1,
                                     const Eigen::MatrixXd& cloud2, int n, std::uint64_t seed) {
  std::vector<MultiGraspRecord> out;
  if (n <= 0) return out;

  const int d = params.codec.dim();
  const int temb_dim = params.hyper.time_embedding_dim;
  const int cond_dim = params.condition_dim();
  const double scale = params.hyper.cloud_scale;

  const Eigen::VectorXd code1 = encode_pointcloud(scale * cloud1, params.encoder);
  const Eigen::VectorXd code2 = encode_pointcloud(scale * cloud2, params.encoder);

  RandomStream rng(RandomStream::splitmix64(seed ^ 0x5a3b1eULL));
  Eigen::MatrixXd x(d, n);
  for (int k = 0; k < n; ++k) {
    for (int i = 0; i < d; ++i) x(i, k) = rng.normal();
  }

  Eigen::MatrixXd input(d + temb_dim + cond_dim, n);
  for (int k = 0; k < n; ++k) {
    input.col(k).segment(d + temb_dim, cond_dim / 2) = code1;
    input.col(k).segment(d + temb_dim + cond_dim / 2, cond_dim / 2) = code2;
  }

  for (int t = params.schedule.t_steps; t >= 1; --t) {
    const double beta = params.schedule.beta[t - 1];
    const double alpha = params.schedule.alpha[t - 1];
    const double ab = params.schedule.alpha_bar[t - 1];
    const Eigen::VectorXd temb = time_embedding(t, temb_dim);
    input.topRows(d) = x;
    for (int k = 0; k < n; ++k) input.col(k).segment(d, temb_dim) = temb;

    const Eigen::MatrixXd eps_hat = params.denoiser.forward(input);
    x = (x - (beta / std::sqrt(1.0 - ab)) * eps_hat) / std::sqrt(alpha);
    if (t > 1) {
      const double sigma = std::sqrt(beta);
      for (int k = 0; k < n; ++k) {
        for (int i = 0; i < d; ++i) x(i, k) += sigma * rng.normal();
      }
    }
  }

  out.reserve(n);
  for (int k = 0; k < n; ++k) out.push_back(params.codec.decode(x.col(k)));
  return out;
}

// --- checkpoint io -----------------------------------------------------------

namespace {

json mlp_to_json(const Mlp& net) {
  json j;
  j["dims"] = json::array();
  j["dims"].push_back(net.w.empty() ? 0 : static_cast<int>(net.w.front().cols()));
  for (const auto& w : net.w) j["dims"].push_back(static_cast<int>(w.rows()));
  j["w"] = json::array();
  j["b"] = json::array();
  for (std::size_t l = 0; l < net.w.size(); ++l) {
    std::vector<double> flat(net.w[l].size());
    Eigen::Map<Eigen::MatrixXd>(flat.data(), net.w[l].rows(), net.w[l].cols()) = net.w[l];
    j["w"].push_back(flat);
    j["b"].push_back(std::vector<double>(net.b[l].data(), net.b[l].data() + net.b[l].size()));
  }
  return j;
}

Mlp mlp_from_json(const json& j) {
  Mlp net;
  const auto dims = j.at("dims").get<std::vector<int>>();
  for (std::size_t l = 0; l + 1 < dims.size(); ++l) {
    const auto flat = j.at("w").at(l).get<std::vector<double>>();
    if (static_cast<int>(flat.size()) != dims[l + 1] * dims[l]) {
      throw DataError("checkpoint: weight block size mismatch");
    }
    Eigen::MatrixXd w(dims[l + 1], dims[l]);
    w = Eigen::Map<const Eigen::MatrixXd>(flat.data(), dims[l + 1], dims[l]);
    net.w.push_back(std::move(w));
    const auto bb = j.at("b").at(l).get<std::vector<double>>();
    net.b.push_back(Eigen::Map<const Eigen::VectorXd>(bb.data(), bb.size()));
  }
  return net;
}

std::vector<double> to_vec(const Eigen::VectorXd& v) {
  return std::vector<double>(v.data(), v.data() + v.size());
}
Eigen::VectorXd from_vec(const std::vector<double>& v) {
  return Eigen::Map<const Eigen::VectorXd>(v.data(), v.size());
}

}  // namespace

void save_checkpoint(const std::string& path, const DenoiserParams& params) {
  json j;
  j["kind"] = "diffusion_checkpoint";
  j["version"] = 1;
  j["dof"] = params.codec.dof;
  j["schedule"] = {{"t_steps", params.schedule.t_steps}, {"beta", to_vec(params.schedule.beta)}};
  j["codec"] = {{"mean", to_vec(params.codec.mean)}, {"std", to_vec(params.codec.stddev)}};
  j["hyper"] = {{"train_steps", params.hyper.train_steps},
                {"batch_size", params.hyper.batch_size},
                {"learning_rate", params.hyper.learning_rate},
                {"encoder_hidden", params.hyper.encoder_hidden},
                {"denoiser_hidden", params.hyper.denoiser_hidden},
                {"time_embedding_dim", params.hyper.time_embedding_dim},
                {"points_per_object", params.hyper.points_per_object},
                {"cloud_scale", params.hyper.cloud_scale}};
  j["encoder"] = mlp_to_json(params.encoder);
  j["denoiser"] = mlp_to_json(params.denoiser);
  std::ostringstream fp;
  fp << std::hex << params.dataset_fingerprint;
  j["dataset_fingerprint"] = fp.str();

  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp);
    if (!out) throw DataError("cannot write checkpoint: " + path);
    out << j.dump() << "\n";
  }
  if (std::rename(tmp.c_str(), path.c_str()) != 0) {
    throw DataError("cannot finalize checkpoint: " + path);
  }
}

DenoiserParams load_checkpoint(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("checkpoint not found: " + path);
  json j;
  try {
    in >> j;
  } catch (const json::parse_error& e) {
    throw ParseError(path + ": " + e.what());
  }
  if (j.value("kind", "") != "diffusion_checkpoint") {
    throw DataError(path + ": not a diffusion checkpoint");
  }
  DenoiserParams params;
  params.codec.dof = j.at("dof").get<int>();
  params.codec.mean = from_vec(j.at("codec").at("mean").get<std::vector<double>>());
  params.codec.stddev = from_vec(j.at("codec").at("std").get<std::vector<double>>());

  const auto beta = j.at("schedule").at("beta").get<std::vector<double>>();
  params.schedule.t_steps = j.at("schedule").at("t_steps").get<int>();
  params.schedule.beta = from_vec(beta);
  params.schedule.alpha.resize(params.schedule.t_steps);
  params.schedule.alpha_bar.resize(params.schedule.t_steps);
  double prod = 1.0;
  for (int t = 0; t < params.schedule.t_steps; ++t) {
    params.schedule.alpha[t] = 1.0 - params.schedule.beta[t];
    prod *= params.schedule.alpha[t];
    params.schedule.alpha_bar[t] = prod;
  }
  params.schedule.check();

  const json& jh = j.at("hyper");
  params.hyper.train_steps = jh.at("train_steps").get<int>();
  params.hyper.batch_size = jh.at("batch_size").get<int>();
  params.hyper.learning_rate = jh.at("learning_rate").get<double>();
  params.hyper.encoder_hidden = jh.at("encoder_hidden").get<std::vector<int>>();
  params.hyper.denoiser_hidden = jh.at("denoiser_hidden").get<std::vector<int>>();
  params.hyper.time_embedding_dim = jh.at("time_embedding_dim").get<int>();
  params.hyper.points_per_object = jh.at("points_per_object").get<int>();
  params.hyper.cloud_scale = jh.at("cloud_scale").get<double>();

  params.encoder = mlp_from_json(j.at("encoder"));
  params.denoiser = mlp_from_json(j.at("denoiser"));
  params.dataset_fingerprint =
      std::stoull(j.value("dataset_fingerprint", "0"), nullptr, 16);

  if (!params.encoder.w.empty() && params.encoder.input_dim() != 3) {
    throw DataError(path + ": encoder input dimension must be 3");
  }
  return params;
}

}  // namespace seqgrasp
