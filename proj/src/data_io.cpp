#include "jacshield/data_io.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

namespace jacshield {

void Dataset::validate(double lo, double hi) const {
    if (inputs.size() != labels.size()) {
        throw Error("dataset '" + name + "': " + std::to_string(inputs.size()) + " inputs vs " +
                    std::to_string(labels.size()) + " labels");
    }
    for (std::size_t label : labels) {
        if (label >= num_classes) {
            throw Error("dataset '" + name + "': label " + std::to_string(label) +
                        " >= num_classes " + std::to_string(num_classes));
        }
    }
    for (const Tensor& t : inputs) {
        t.check_invariants();
        for (double v : t.data) {
            if (v < lo || v > hi) {
                throw Error("dataset '" + name + "': value " + std::to_string(v) +
                            " outside [" + std::to_string(lo) + "," + std::to_string(hi) + "]");
            }
        }
    }
}

namespace {

std::uint32_t read_be32(std::istream& is, const std::string& path, const char* what) {
    unsigned char b[4];
    is.read(reinterpret_cast<char*>(b), 4);
    if (!is) throw IoError("idx '" + path + "': truncated while reading " + what);
    return (std::uint32_t(b[0]) << 24) | (std::uint32_t(b[1]) << 16) |
           (std::uint32_t(b[2]) << 8) | std::uint32_t(b[3]);
}

std::vector<unsigned char> read_bytes(std::istream& is, std::size_t n, const std::string& path,
                                      const char* what) {
    std::vector<unsigned char> buf(n);
    is.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(n));
    if (!is) throw IoError("idx '" + path + "': truncated while reading " + what);
    return buf;
}

}  // namespace

Dataset load_idx(const std::string& images_path, const std::string& labels_path) {
    std::ifstream imgs(images_path, std::ios::binary);
    if (!imgs) throw IoError("idx: cannot open '" + images_path + "'");
    std::uint32_t magic = read_be32(imgs, images_path, "magic");
    if (magic != 2051) {
        throw IoError("idx '" + images_path + "': bad image magic " + std::to_string(magic) +
                      " at offset 0 (expected 2051)");
    }
    std::uint32_t n = read_be32(imgs, images_path, "count");
    std::uint32_t rows = read_be32(imgs, images_path, "rows");
    std::uint32_t cols = read_be32(imgs, images_path, "cols");

    std::ifstream labs(labels_path, std::ios::binary);
    if (!labs) throw IoError("idx: cannot open '" + labels_path + "'");
    std::uint32_t lmagic = read_be32(labs, labels_path, "magic");
    if (lmagic != 2049) {
        throw IoError("idx '" + labels_path + "': bad label magic " + std::to_string(lmagic) +
                      " at offset 0 (expected 2049)");
    }
    std::uint32_t ln = read_be32(labs, labels_path, "count");
    if (ln != n) {
        throw IoError("idx: image count " + std::to_string(n) + " does not match label count " +
                      std::to_string(ln));
    }

    Dataset ds;
    ds.name = "mnist";
    const std::size_t d = static_cast<std::size_t>(rows) * cols;
    ds.inputs.reserve(n);
    ds.labels.reserve(n);
    std::size_t max_label = 0;
    for (std::uint32_t i = 0; i < n; ++i) {
        auto pix = read_bytes(imgs, d, images_path, "pixels");
        Tensor t = Tensor::zeros({d});
        for (std::size_t p = 0; p < d; ++p) t[p] = static_cast<double>(pix[p]) / 255.0;
        ds.inputs.push_back(std::move(t));
        auto lab = read_bytes(labs, 1, labels_path, "label");
        ds.labels.push_back(lab[0]);
        max_label = std::max<std::size_t>(max_label, lab[0]);
    }
    ds.num_classes = max_label + 1;
    return ds;
}

Dataset load_cifar10(const std::string& batch_path) {
    constexpr std::size_t kRecord = 3073;
    constexpr std::size_t kCount = 10000;
    std::ifstream is(batch_path, std::ios::binary | std::ios::ate);
    if (!is) throw IoError("cifar10: cannot open '" + batch_path + "'");
    std::size_t size = static_cast<std::size_t>(is.tellg());
    if (size != kRecord * kCount) {
        throw IoError("cifar10 '" + batch_path + "': expected " +
                      std::to_string(kRecord * kCount) + " bytes, got " + std::to_string(size));
    }
    is.seekg(0);

    Dataset ds;
    ds.name = "cifar10";
    ds.num_classes = 10;
    ds.inputs.reserve(kCount);
    ds.labels.reserve(kCount);
    std::vector<unsigned char> rec(kRecord);
    for (std::size_t i = 0; i < kCount; ++i) {
        is.read(reinterpret_cast<char*>(rec.data()), kRecord);
        if (!is) throw IoError("cifar10 '" + batch_path + "': truncated record");
        if (rec[0] > 9) {
            throw IoError("cifar10 '" + batch_path + "': label byte " + std::to_string(rec[0]) +
                          " out of range in record " + std::to_string(i));
        }
        ds.labels.push_back(rec[0]);
        Tensor t = Tensor::zeros({32, 32, 3});
        // channel-planar source -> HWC
        for (std::size_t c = 0; c < 3; ++c)
            for (std::size_t y = 0; y < 32; ++y)
                for (std::size_t x = 0; x < 32; ++x)
                    t[(y * 32 + x) * 3 + c] =
                        static_cast<double>(rec[1 + c * 1024 + y * 32 + x]) / 255.0;
        ds.inputs.push_back(std::move(t));
    }
    return ds;
}

Dataset synth_gaussians(std::size_t classes, std::size_t dims, std::size_t n_per_class,
                        double spread, std::uint64_t seed) {
    if (classes < 2) throw Error("synth_gaussians: need at least 2 classes");
    if (dims < 2) throw Error("synth_gaussians: need at least 2 dims");

    Rng rng(mix_seed(seed, 0x5A17));
    std::vector<std::vector<double>> centers(classes, std::vector<double>(dims));
    for (auto& c : centers) {
        for (auto& v : c) v = rng.gaussian();
        double nrm = l2_norm(c);
        for (auto& v : c) v = 2.0 * v / nrm;
    }

    Dataset ds;
    ds.name = "synth";
    ds.num_classes = classes;
    ds.inputs.reserve(classes * n_per_class);
    ds.labels.reserve(classes * n_per_class);
    for (std::size_t c = 0; c < classes; ++c) {
        for (std::size_t i = 0; i < n_per_class; ++i) {
            Tensor t = Tensor::zeros({dims});
            for (std::size_t dd = 0; dd < dims; ++dd) {
                double raw = centers[c][dd] + spread * rng.gaussian();
                t[dd] = std::clamp((raw + 3.0) / 6.0, 0.0, 1.0);
            }
            ds.inputs.push_back(std::move(t));
            ds.labels.push_back(c);
        }
    }
    return ds;
}

Dataset subsample(const Dataset& ds, std::size_t n, std::uint64_t seed) {
    if (n > ds.size()) {
        throw Error("subsample: requested " + std::to_string(n) + " of " +
                    std::to_string(ds.size()));
    }
    std::vector<std::vector<std::size_t>> by_class(ds.num_classes);
    for (std::size_t i = 0; i < ds.size(); ++i) by_class[ds.labels[i]].push_back(i);

    // floor of the proportional share per class, remainder round-robin
    std::vector<std::size_t> take(ds.num_classes, 0);
    std::size_t assigned = 0;
    for (std::size_t c = 0; c < ds.num_classes; ++c) {
        take[c] = n * by_class[c].size() / ds.size();
        assigned += take[c];
    }
    for (std::size_t c = 0; assigned < n; c = (c + 1) % ds.num_classes) {
        if (take[c] < by_class[c].size()) {
            ++take[c];
            ++assigned;
        }
    }

    Rng rng(mix_seed(seed, 0x5B5B));
    Dataset out;
    out.name = ds.name;
    out.split = ds.split;
    out.num_classes = ds.num_classes;
    out.inputs.reserve(n);
    out.labels.reserve(n);
    for (std::size_t c = 0; c < ds.num_classes; ++c) {
        auto& pool = by_class[c];
        for (std::size_t i = 0; i + 1 < pool.size(); ++i) {  // Fisher-Yates
            std::size_t j = i + rng.uniform_index(pool.size() - i);
            std::swap(pool[i], pool[j]);
        }
        for (std::size_t i = 0; i < take[c]; ++i) {
            out.inputs.push_back(ds.inputs[pool[i]]);
            out.labels.push_back(ds.labels[pool[i]]);
        }
    }
    return out;
}

Dataset reshape_inputs(Dataset ds, const Shape& shape) {
    for (Tensor& t : ds.inputs) {
        if (numel(shape) != t.size()) {
            throw Error("reshape_inputs: element count mismatch");
        }
        t.shape = shape;
    }
    return ds;
}

}  // namespace jacshield
