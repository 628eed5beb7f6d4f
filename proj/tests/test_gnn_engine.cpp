#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "fixtures.hpp"
#include "graphdissect/errors.hpp"
#include "graphdissect/model.hpp"
#include "graphdissect/synthetic.hpp"
#include "graphdissect/train.hpp"

using namespace graphdissect;

namespace {

GraphDataset one_graph_dataset(Graph g) {
  GraphDataset ds;
  ds.num_classes = 2;
  g.graph_label = 0;
  ds.graphs.push_back(std::move(g));
  return ds;
}

LayerParams identity_gin(int d) {
  LayerParams p;
  p.type = LayerType::Gin;
  p.w1 = Eigen::MatrixXd::Identity(d, d);
  p.w2 = Eigen::MatrixXd::Identity(d, d);
  p.b1 = Eigen::VectorXd::Zero(d);
  p.b2 = Eigen::VectorXd::Zero(d);
  return p;
}

Graph permute_graph(const Graph& g, const std::vector<int>& perm) {
  Graph out;
  out.resize(g.node_count);
  if (g.labeled()) out.node_labels.resize(g.node_count);
  out.graph_label = g.graph_label;
  for (int v = 0; v < g.node_count; ++v) {
    if (g.labeled()) out.node_labels[perm[v]] = g.node_labels[v];
    for (int u : g.adjacency[v]) out.add_edge(perm[v], perm[u]);
  }
  out.normalize();
  return out;
}

}  // namespace

TEST_CASE("build_features one-hot and constant modes") {
  GraphDataset mol = testsupport::gen_molecule_fixture(2, 1);
  const Graph& g = mol.graphs[0];
  Eigen::MatrixXd x = build_features(g, mol);
  CHECK(x.rows() == 7);
  CHECK(x.cols() == g.node_count);
  for (int v = 0; v < g.node_count; ++v) {
    CHECK(x.col(v).sum() == 1.0);
    CHECK(x(g.node_labels[v], v) == 1.0);
  }

  GraphDataset plain = testsupport::random_unlabeled_dataset(1, 4, 4, 0.5, 2);
  Eigen::MatrixXd ones = build_features(plain.graphs[0], plain);
  CHECK(ones.rows() == 1);
  CHECK(ones.cols() == 4);
  CHECK(ones.minCoeff() == 1.0);
  CHECK(ones.maxCoeff() == 1.0);

  // node labels present but alphabet empty
  GraphDataset broken = plain;
  broken.graphs[0].node_labels.assign(4, 0);
  CHECK_THROWS_AS(build_features(broken.graphs[0], broken), ConfigError);
}

TEST_CASE("gin layer forward basics") {
  SUBCASE("isolated node with identity MLP is a fixed point on nonneg input") {
    Graph g;
    g.resize(1);
    Eigen::MatrixXd h(3, 1);
    h << 0.3, 0.0, 2.0;
    Eigen::MatrixXd out = gin_layer_forward(h, g, identity_gin(3));
    CHECK(out.isApprox(h));
  }
  SUBCASE("two connected scalar nodes aggregate to 2") {
    Graph g;
    g.resize(2);
    g.add_edge(0, 1);
    Eigen::MatrixXd h = Eigen::MatrixXd::Ones(1, 2);
    Eigen::MatrixXd out = gin_layer_forward(h, g, identity_gin(1));
    CHECK(out(0, 0) == 2.0);
    CHECK(out(0, 1) == 2.0);
  }
  SUBCASE("negative pre-activations clamp to zero") {
    Graph g;
    g.resize(1);
    LayerParams p = identity_gin(1);
    p.b2 = Eigen::VectorXd::Constant(1, -5.0);
    Eigen::MatrixXd h = Eigen::MatrixXd::Ones(1, 1);
    Eigen::MatrixXd out = gin_layer_forward(h, g, p);
    CHECK(out(0, 0) == 0.0);
  }
  SUBCASE("shape mismatch is rejected") {
    Graph g;
    g.resize(2);
    Eigen::MatrixXd h = Eigen::MatrixXd::Ones(3, 2);
    CHECK_THROWS_AS(gin_layer_forward(h, g, identity_gin(2)), ConfigError);
  }
}

TEST_CASE("gcn layer forward basics") {
  LayerParams p;
  p.type = LayerType::Gcn;
  p.w1 = Eigen::MatrixXd::Identity(1, 1);
  p.b1 = Eigen::VectorXd::Zero(1);

  SUBCASE("isolated node sees only its self-loop") {
    Graph g;
    g.resize(1);
    Eigen::MatrixXd h = Eigen::MatrixXd::Constant(1, 1, 3.0);
    Eigen::MatrixXd out = gcn_layer_forward(h, g, p);
    CHECK(out(0, 0) == doctest::Approx(3.0));
  }
  SUBCASE("two-node edge with symmetric normalization") {
    Graph g;
    g.resize(2);
    g.add_edge(0, 1);
    Eigen::MatrixXd h = Eigen::MatrixXd::Ones(1, 2);
    Eigen::MatrixXd out = gcn_layer_forward(h, g, p);
    CHECK(out(0, 0) == doctest::Approx(1.0));
    CHECK(out(0, 1) == doctest::Approx(1.0));
  }
  SUBCASE("empty graph gives an empty matrix") {
    Graph g;
    Eigen::MatrixXd h(1, 0);
    Eigen::MatrixXd out = gcn_layer_forward(h, g, p);
    CHECK(out.cols() == 0);
  }
}

TEST_CASE("forward_with_activations records every layer, pooling and logits") {
  GraphDataset ds = testsupport::random_unlabeled_dataset(3, 5, 9, 0.4, 3);
  ModelConfig cfg;
  cfg.num_layers = 3;
  cfg.hidden_dim = 8;
  cfg.seed = 5;
  ModelParams params = init_params(cfg, feature_dim(ds));

  const Graph& g = ds.graphs[0];
  ActivationRecord rec = forward_with_activations(params, g, ds);
  REQUIRE(rec.layer_acts.size() == 4);  // input + 3 layers

  SUBCASE("add pooling is the exact row sum") {
    for (int k = 0; k < cfg.hidden_dim; ++k) {
      double sum = 0.0;
      for (int v = 0; v < g.node_count; ++v) sum += rec.layer_acts.back()(k, v);
      CHECK(rec.pooled(k) == sum);
    }
  }
  SUBCASE("final-layer activations are nonnegative") {
    CHECK(rec.layer_acts.back().minCoeff() >= 0.0);
  }
  SUBCASE("zero weights give zero activations and bias logits") {
    ModelParams zero = params;
    for (auto& layer : zero.layers) {
      layer.w1.setZero();
      layer.w2.setZero();
      layer.b1.setZero();
      layer.b2.setZero();
    }
    zero.head.w.setZero();
    zero.head.b << 0.25, -0.5;
    ActivationRecord z = forward_with_activations(zero, g, ds);
    CHECK(z.layer_acts.back().maxCoeff() == 0.0);
    CHECK(z.logits(0) == 0.25);
    CHECK(z.logits(1) == -0.5);
  }
  SUBCASE("one-layer model is layer forward plus head") {
    ModelConfig c1 = cfg;
    c1.num_layers = 1;
    ModelParams p1 = init_params(c1, feature_dim(ds));
    Graph single;
    single.resize(1);
    ActivationRecord r1 = forward_with_activations(p1, single, ds);
    Eigen::MatrixXd direct =
        gin_layer_forward(build_features(single, ds), single, p1.layers[0]);
    CHECK(r1.layer_acts.back().isApprox(direct));
    CHECK(r1.logits.isApprox(p1.head.w * direct.rowwise().sum() + p1.head.b));
  }
  SUBCASE("byte-identical across runs") {
    ActivationRecord again = forward_with_activations(params, g, ds);
    CHECK(rec.logits == again.logits);
    CHECK(rec.pooled == again.pooled);
    for (std::size_t l = 0; l < rec.layer_acts.size(); ++l)
      CHECK(rec.layer_acts[l] == again.layer_acts[l]);
  }
}

TEST_CASE("message passing is permutation equivariant, pooling invariant") {
  GraphDataset ds = testsupport::gen_molecule_fixture(4, 21);
  ModelConfig cfg;
  cfg.num_layers = 2;
  cfg.hidden_dim = 6;
  cfg.seed = 9;
  for (LayerType type : {LayerType::Gin, LayerType::Gcn}) {
    cfg.layer_type = type;
    ModelParams params = init_params(cfg, feature_dim(ds));
    const Graph& g = ds.graphs[1];

    Rng rng(77);
    std::vector<int> perm(g.node_count);
    for (int v = 0; v < g.node_count; ++v) perm[v] = v;
    rng.shuffle(perm);
    Graph pg = permute_graph(g, perm);

    ActivationRecord a = forward_with_activations(params, g, ds);
    ActivationRecord b = forward_with_activations(params, pg, ds);
    for (std::size_t l = 1; l < a.layer_acts.size(); ++l)
      for (int v = 0; v < g.node_count; ++v)
        CHECK(a.layer_acts[l].col(v).isApprox(b.layer_acts[l].col(perm[v]), 1e-9));
    CHECK(a.pooled.isApprox(b.pooled, 1e-9));
    CHECK(a.logits.isApprox(b.logits, 1e-9));
  }
}

TEST_CASE("training on the separable label toy") {
  GraphDataset ds = testsupport::gen_label_toy(24, 3);
  make_split(ds, 0.8, 3);
  ModelConfig cfg;
  cfg.num_layers = 2;
  cfg.hidden_dim = 8;
  cfg.learning_rate = 0.01;
  cfg.weight_decay = 1e-4;
  cfg.epochs = 200;
  cfg.batch_size = 8;
  cfg.seed = 1;

  TrainResult result = train(cfg, ds);
  CHECK(evaluate(result.params, ds, ds.train_indices).accuracy == 1.0);

  SUBCASE("train loss trends down over every 20-epoch window until convergence") {
    const auto& log = result.log;
    for (std::size_t i = 0; i + 20 < log.size(); ++i) {
      if (log[i].train_loss <= 1e-4) break;  // converged; only decay-noise remains
      CHECK(log[i + 20].train_loss <= log[i].train_loss + 1e-6);
    }
  }
  SUBCASE("same config and seed reproduce identical parameters") {
    TrainResult again = train(cfg, ds);
    CHECK(again.params.head.w == result.params.head.w);
    for (std::size_t l = 0; l < cfg.num_layers; ++l) {
      CHECK(again.params.layers[l].w1 == result.params.layers[l].w1);
      CHECK(again.params.layers[l].w2 == result.params.layers[l].w2);
    }
  }
}

TEST_CASE("epochs=0 returns the initialization unchanged") {
  GraphDataset ds = testsupport::gen_label_toy(10, 4);
  make_split(ds, 0.8, 4);
  ModelConfig cfg;
  cfg.num_layers = 1;
  cfg.hidden_dim = 4;
  cfg.epochs = 0;
  cfg.seed = 11;
  TrainResult result = train(cfg, ds);
  ModelParams fresh = init_params(cfg, feature_dim(ds));
  CHECK(result.params.head.w == fresh.head.w);
  CHECK(result.params.layers[0].w1 == fresh.layers[0].w1);
  CHECK(result.log.empty());
}

TEST_CASE("gradient check against central finite differences") {
  GraphDataset ds = testsupport::random_unlabeled_dataset(4, 4, 6, 0.5, 13);
  for (LayerType type : {LayerType::Gin, LayerType::Gcn}) {
    ModelConfig cfg;
    cfg.num_layers = type == LayerType::Gin ? 1 : 2;
    cfg.hidden_dim = type == LayerType::Gin ? 3 : 4;
    cfg.layer_type = type;
    cfg.seed = 19;
    ModelParams params = init_params(cfg, feature_dim(ds));
    double err = gradient_check(params, ds, 0, 1e-5, 500, 3);
    CHECK(err < 1e-4);
  }
}

TEST_CASE("gradient of an unused weight column is zero on both routes") {
  // alphabet {C,O}, but the probed graph contains only C nodes, so the
  // feature row for O never feeds anything
  GraphDataset ds = testsupport::gen_label_toy(6, 8);
  const Graph* all_c = nullptr;
  int all_c_id = 0;
  for (int i = 0; i < ds.size(); ++i)
    if (ds.graphs[i].graph_label == 0) {
      all_c = &ds.graphs[i];
      all_c_id = i;
      break;
    }
  REQUIRE(all_c != nullptr);

  ModelConfig cfg;
  cfg.num_layers = 1;
  cfg.hidden_dim = 3;
  cfg.seed = 2;
  ModelParams params = init_params(cfg, feature_dim(ds));
  ParamGrads grads = zero_grads(params);
  loss_and_gradients(params, ds, {all_c_id}, grads);
  CHECK(grads.layers[0].w1.col(1).norm() == 0.0);

  ModelParams bumped = params;
  bumped.layers[0].w1(0, 1) += 1e-5;
  ParamGrads g2 = zero_grads(params);
  double up = loss_and_gradients(bumped, ds, {all_c_id}, g2);
  bumped.layers[0].w1(0, 1) -= 2e-5;
  double down = loss_and_gradients(bumped, ds, {all_c_id}, g2);
  CHECK((up - down) / 2e-5 == 0.0);
}

TEST_CASE("gradient check rejects epsilon outside (0, 1e-2]") {
  GraphDataset ds = testsupport::random_unlabeled_dataset(1, 4, 4, 0.5, 1);
  ModelConfig cfg;
  cfg.num_layers = 1;
  cfg.hidden_dim = 2;
  ModelParams params = init_params(cfg, feature_dim(ds));
  CHECK_THROWS_AS(gradient_check(params, ds, 0, 0.0), ConfigError);
  CHECK_THROWS_AS(gradient_check(params, ds, 0, 0.5), ConfigError);
}

TEST_CASE("early stopping halts on a test-accuracy plateau") {
  GraphDataset ds = testsupport::gen_label_toy(24, 5);
  make_split(ds, 0.8, 5);
  ModelConfig cfg;
  cfg.num_layers = 1;
  cfg.hidden_dim = 4;
  cfg.learning_rate = 0.01;
  cfg.epochs = 400;
  cfg.early_stop_patience = 10;
  cfg.seed = 6;
  TrainResult result = train(cfg, ds);
  CHECK(result.log.size() < 400);
}
