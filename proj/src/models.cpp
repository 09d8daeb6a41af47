#include "irmx/models.hpp"

#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>

namespace irmx {

LinearModel LinearModel::zeros(std::size_t dim, bool use_bias) {
    return LinearModel{std::vector<double>(dim, 0.0), 0.0, use_bias};
}

MlpModel MlpModel::zeros(std::span<const std::size_t> widths) {
    if (widths.size() < 2) throw std::invalid_argument("MlpModel: need at least input and output widths");
    MlpModel m;
    for (std::size_t l = 0; l + 1 < widths.size(); ++l)
        m.layers.push_back({Matrix(widths[l + 1], widths[l]), std::vector<double>(widths[l + 1], 0.0)});
    m.validate();
    return m;
}

MlpModel MlpModel::init(std::span<const std::size_t> widths, Rng& rng) {
    MlpModel m = zeros(widths);
    for (auto& layer : m.layers) {
        const double scale = 1.0 / std::sqrt(static_cast<double>(layer.weight.cols()));
        for (double& v : layer.weight.flat()) v = sample_normal(rng, 0.0, scale);
    }
    return m;
}

std::vector<std::size_t> MlpModel::widths() const {
    std::vector<std::size_t> w;
    if (layers.empty()) return w;
    w.push_back(layers.front().weight.cols());
    for (const auto& layer : layers) w.push_back(layer.weight.rows());
    return w;
}

std::size_t MlpModel::input_dim() const { return layers.empty() ? 0 : layers.front().weight.cols(); }

std::size_t MlpModel::parameter_count() const {
    std::size_t n = 0;
    for (const auto& layer : layers) n += layer.weight.size() + layer.bias.size();
    return n;
}

void MlpModel::validate() const {
    if (layers.empty()) throw std::invalid_argument("MlpModel: no layers");
    for (std::size_t l = 0; l < layers.size(); ++l) {
        const auto& layer = layers[l];
        if (layer.weight.rows() == 0 || layer.weight.cols() == 0)
            throw std::invalid_argument("MlpModel: empty layer");
        if (layer.bias.size() != layer.weight.rows())
            throw std::invalid_argument("MlpModel: bias length does not match layer width");
        if (l > 0 && layer.weight.cols() != layers[l - 1].weight.rows())
            throw std::invalid_argument("MlpModel: layer dimensions do not chain");
    }
    if (layers.back().weight.rows() != 1) throw std::invalid_argument("MlpModel: final layer width must be 1");
}

std::size_t input_dim(const Model& model) {
    return std::visit([](const auto& m) { return m.input_dim(); }, model);
}

std::size_t parameter_count(const Model& model) {
    return std::visit([](const auto& m) { return m.parameter_count(); }, model);
}

GradientVector parameters(const Model& model) {
    GradientVector theta;
    theta.reserve(parameter_count(model));
    if (const auto* lin = std::get_if<LinearModel>(&model)) {
        theta = lin->w;
        if (lin->use_bias) theta.push_back(lin->bias);
        return theta;
    }
    for (const auto& layer : std::get<MlpModel>(model).layers) {
        theta.insert(theta.end(), layer.weight.flat().begin(), layer.weight.flat().end());
        theta.insert(theta.end(), layer.bias.begin(), layer.bias.end());
    }
    return theta;
}

Model with_parameters(const Model& model, std::span<const double> theta) {
    if (theta.size() != parameter_count(model))
        throw std::invalid_argument("with_parameters: parameter vector has wrong length");
    Model out = model;
    std::size_t k = 0;
    if (auto* lin = std::get_if<LinearModel>(&out)) {
        for (double& v : lin->w) v = theta[k++];
        if (lin->use_bias) lin->bias = theta[k++];
        return out;
    }
    for (auto& layer : std::get<MlpModel>(out).layers) {
        for (double& v : layer.weight.flat()) v = theta[k++];
        for (double& v : layer.bias) v = theta[k++];
    }
    return out;
}

namespace {

ForwardPass mlp_forward(const MlpModel& model, const Matrix& X) {
    if (X.cols() != model.input_dim()) throw std::invalid_argument("forward: input dimension mismatch");
    const std::size_t n = X.rows();
    ForwardPass tape;
    tape.activations.reserve(model.layers.size());
    tape.activations.push_back(X);
    for (std::size_t l = 0; l < model.layers.size(); ++l) {
        const auto& layer = model.layers[l];
        const Matrix& in = tape.activations.back();
        const bool last = l + 1 == model.layers.size();
        Matrix out(n, layer.weight.rows());
        for (std::size_t i = 0; i < n; ++i) {
            auto x = in.row(i);
            for (std::size_t o = 0; o < layer.weight.rows(); ++o) {
                auto w = layer.weight.row(o);
                double s = layer.bias[o];
                for (std::size_t j = 0; j < w.size(); ++j) s += w[j] * x[j];
                out(i, o) = (last || s > 0.0) ? s : 0.0;
            }
        }
        if (last) {
            tape.outputs.assign(out.flat().begin(), out.flat().end());
        } else {
            tape.activations.push_back(std::move(out));
        }
    }
    return tape;
}

GradientVector mlp_backward(const MlpModel& model, const ForwardPass& tape, std::span<const double> c) {
    const std::size_t n = tape.outputs.size();
    if (tape.activations.size() != model.layers.size())
        throw std::invalid_argument("backward_with_cotangent: forward pass does not match model");
    if (c.size() != n) throw std::invalid_argument("backward_with_cotangent: cotangent length mismatch");

    // Per-layer gradient blocks, assembled in flattening order at the end.
    std::vector<std::vector<double>> blocks(model.layers.size());
    Matrix delta(n, 1);
    for (std::size_t i = 0; i < n; ++i) delta(i, 0) = c[i];

    for (std::size_t l = model.layers.size(); l-- > 0;) {
        const auto& layer = model.layers[l];
        const Matrix& a = tape.activations[l];
        const std::size_t out_w = layer.weight.rows(), in_w = layer.weight.cols();
        std::vector<double> g(out_w * in_w + out_w, 0.0);
        for (std::size_t i = 0; i < n; ++i) {
            auto x = a.row(i);
            for (std::size_t o = 0; o < out_w; ++o) {
                const double dv = delta(i, o);
                if (dv == 0.0) continue;
                double* gw = g.data() + o * in_w;
                for (std::size_t j = 0; j < in_w; ++j) gw[j] += dv * x[j];
                g[out_w * in_w + o] += dv;
            }
        }
        blocks[l] = std::move(g);
        if (l == 0) break;
        Matrix prev(n, in_w);
        for (std::size_t i = 0; i < n; ++i) {
            auto x = a.row(i);
            for (std::size_t j = 0; j < in_w; ++j) {
                if (!(x[j] > 0.0)) continue;  // ReLU'(0) = 0
                double s = 0.0;
                for (std::size_t o = 0; o < out_w; ++o) s += delta(i, o) * layer.weight(o, j);
                prev(i, j) = s;
            }
        }
        delta = std::move(prev);
    }

    GradientVector grad;
    grad.reserve(model.parameter_count());
    for (auto& b : blocks) grad.insert(grad.end(), b.begin(), b.end());
    return grad;
}

GradientVector linear_backward(const LinearModel& model, const Matrix& X, std::span<const double> c) {
    if (X.cols() != model.w.size()) throw std::invalid_argument("backward_with_cotangent: input dimension mismatch");
    if (c.size() != X.rows()) throw std::invalid_argument("backward_with_cotangent: cotangent length mismatch");
    const std::size_t dim = model.w.size();
    GradientVector g(model.parameter_count(), 0.0);
    double gb = 0.0;
    for (std::size_t i = 0; i < X.rows(); ++i) {
        auto x = X.row(i);
        for (std::size_t j = 0; j < dim; ++j) g[j] += c[i] * x[j];
        gb += c[i];
    }
    if (model.use_bias) g[dim] = gb;
    return g;
}

}  // namespace

std::vector<double> forward(const Model& model, const Matrix& X) {
    if (const auto* lin = std::get_if<LinearModel>(&model)) {
        if (X.cols() != lin->w.size()) throw std::invalid_argument("forward: input dimension mismatch");
        std::vector<double> out(X.rows());
        for (std::size_t i = 0; i < X.rows(); ++i) {
            auto x = X.row(i);
            double s = lin->use_bias ? lin->bias : 0.0;
            for (std::size_t j = 0; j < x.size(); ++j) s += lin->w[j] * x[j];
            out[i] = s;
        }
        return out;
    }
    return mlp_forward(std::get<MlpModel>(model), X).outputs;
}

ForwardPass forward_pass(const Model& model, const Matrix& X) {
    if (std::holds_alternative<LinearModel>(model)) return ForwardPass{forward(model, X), {}};
    return mlp_forward(std::get<MlpModel>(model), X);
}

GradientVector backward_from(const Model& model, const Matrix& X, const ForwardPass& pass,
                             std::span<const double> c) {
    if (c.size() != pass.outputs.size()) throw std::invalid_argument("backward_with_cotangent: cotangent length mismatch");
    if (const auto* lin = std::get_if<LinearModel>(&model)) return linear_backward(*lin, X, c);
    return mlp_backward(std::get<MlpModel>(model), pass, c);
}

GradientVector backward_with_cotangent(const Model& model, const Matrix& X, std::span<const double> c) {
    if (c.size() != X.rows()) throw std::invalid_argument("backward_with_cotangent: cotangent length mismatch");
    if (const auto* lin = std::get_if<LinearModel>(&model)) return linear_backward(*lin, X, c);
    const auto& mlp = std::get<MlpModel>(model);
    return mlp_backward(mlp, mlp_forward(mlp, X), c);
}

void save_checkpoint(const Model& model, std::ostream& os) {
    if (const auto* lin = std::get_if<LinearModel>(&model)) {
        os << "linear " << lin->w.size() << (lin->use_bias ? " bias" : "") << '\n';
    } else {
        os << "mlp";
        for (auto w : std::get<MlpModel>(model).widths()) os << ' ' << w;
        os << '\n';
    }
    char buf[32];
    for (double v : parameters(model)) {
        std::snprintf(buf, sizeof buf, "%.17g", v);
        os << buf << '\n';
    }
}

Model load_checkpoint(std::istream& is) {
    std::string header;
    if (!std::getline(is, header)) throw std::runtime_error("load_checkpoint: missing header");
    std::istringstream hs(header);
    std::string kind;
    hs >> kind;
    Model model;
    if (kind == "linear") {
        std::size_t dim = 0;
        std::string flag;
        if (!(hs >> dim) || dim == 0) throw std::runtime_error("load_checkpoint: bad linear header");
        const bool bias = static_cast<bool>(hs >> flag) && flag == "bias";
        if (!flag.empty() && flag != "bias") throw std::runtime_error("load_checkpoint: bad linear header");
        model = LinearModel::zeros(dim, bias);
    } else if (kind == "mlp") {
        std::vector<std::size_t> widths;
        std::size_t w = 0;
        while (hs >> w) widths.push_back(w);
        if (!hs.eof()) throw std::runtime_error("load_checkpoint: bad mlp header");
        try {
            model = MlpModel::zeros(widths);
        } catch (const std::invalid_argument& e) {
            throw std::runtime_error(std::string("load_checkpoint: ") + e.what());
        }
    } else {
        throw std::runtime_error("load_checkpoint: unknown model kind '" + kind + "'");
    }

    std::vector<double> theta;
    theta.reserve(parameter_count(model));
    std::string line;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        std::size_t pos = 0;
        const double v = std::stod(line, &pos);
        if (pos != line.size()) throw std::runtime_error("load_checkpoint: trailing characters in value line");
        theta.push_back(v);
    }
    if (theta.size() != parameter_count(model))
        throw std::runtime_error("load_checkpoint: expected " + std::to_string(parameter_count(model)) +
                                 " values, got " + std::to_string(theta.size()));
    return with_parameters(model, theta);
}

}  // namespace irmx
