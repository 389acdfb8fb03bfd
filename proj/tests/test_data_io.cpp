#include <doctest.h>

#include <algorithm>
#include <cstdio>
#include <fstream>

#include "jacshield/data_io.hpp"
#include "support/oracles.hpp"

using namespace jacshield;

namespace {

void write_be32(std::ofstream& os, std::uint32_t v) {
    unsigned char b[4] = {static_cast<unsigned char>(v >> 24),
                          static_cast<unsigned char>(v >> 16),
                          static_cast<unsigned char>(v >> 8), static_cast<unsigned char>(v)};
    os.write(reinterpret_cast<char*>(b), 4);
}

void write_idx_pair(const std::string& img_path, const std::string& lab_path, std::size_t n,
                    std::size_t rows, std::size_t cols, std::uint32_t img_magic = 2051,
                    std::uint32_t lab_magic = 2049, std::size_t lab_n_override = 0) {
    std::ofstream img(img_path, std::ios::binary);
    write_be32(img, img_magic);
    write_be32(img, static_cast<std::uint32_t>(n));
    write_be32(img, static_cast<std::uint32_t>(rows));
    write_be32(img, static_cast<std::uint32_t>(cols));
    for (std::size_t i = 0; i < n * rows * cols; ++i) {
        unsigned char px = static_cast<unsigned char>(i == 0 ? 255 : i % 7);
        img.write(reinterpret_cast<char*>(&px), 1);
    }
    std::ofstream lab(lab_path, std::ios::binary);
    write_be32(lab, lab_magic);
    write_be32(lab, static_cast<std::uint32_t>(lab_n_override ? lab_n_override : n));
    for (std::size_t i = 0; i < (lab_n_override ? lab_n_override : n); ++i) {
        unsigned char y = static_cast<unsigned char>(i % 3);
        lab.write(reinterpret_cast<char*>(&y), 1);
    }
}

}  // namespace

TEST_CASE("load_idx: parsing, scaling, and format errors") {
    write_idx_pair("ti.idx", "tl.idx", 2, 28, 28);
    Dataset ds = load_idx("ti.idx", "tl.idx");
    CHECK(ds.size() == 2);
    CHECK(ds.inputs[0].size() == 784);  // flattened 28x28
    CHECK(ds.inputs[0][0] == 1.0);      // byte 255 -> exactly 1.0
    CHECK(ds.labels[0] == 0);
    CHECK(ds.labels[1] == 1);
    ds.validate();

    write_idx_pair("bad.idx", "bl.idx", 1, 4, 4, /*img_magic=*/2052);
    try {
        (void)load_idx("bad.idx", "bl.idx");
        FAIL("expected bad magic");
    } catch (const IoError& e) {
        CHECK(std::string(e.what()).find("offset 0") != std::string::npos);
    }

    write_idx_pair("ok.idx", "mismatch.idx", 2, 4, 4, 2051, 2049, /*lab_n=*/3);
    CHECK_THROWS_AS((void)load_idx("ok.idx", "mismatch.idx"), IoError);

    {
        std::ofstream trunc("trunc.idx", std::ios::binary);
        write_be32(trunc, 2051);
        write_be32(trunc, 5);
        write_be32(trunc, 28);
        write_be32(trunc, 28);
        char px = 3;
        trunc.write(&px, 1);
    }
    write_idx_pair("x.idx", "y.idx", 5, 28, 28);
    CHECK_THROWS_AS((void)load_idx("trunc.idx", "y.idx"), IoError);

    for (const char* f : {"ti.idx", "tl.idx", "bad.idx", "bl.idx", "ok.idx", "mismatch.idx",
                          "trunc.idx", "x.idx", "y.idx"}) {
        std::remove(f);
    }
}

TEST_CASE("load_cifar10: record layout and size check") {
    {
        std::ofstream os("batch.bin", std::ios::binary);
        std::vector<unsigned char> rec(3073, 0);
        for (std::size_t i = 0; i < 10000; ++i) {
            rec[0] = static_cast<unsigned char>(i % 10);
            rec[1] = 255;              // R plane, pixel (0,0)
            rec[1 + 1024] = 128;       // G plane, pixel (0,0)
            os.write(reinterpret_cast<char*>(rec.data()), 3073);
        }
    }
    Dataset ds = load_cifar10("batch.bin");
    CHECK(ds.size() == 10000);
    CHECK(ds.labels[9] == 9);
    CHECK(ds.inputs[0].shape == Shape{32, 32, 3});
    CHECK(ds.inputs[0][0] == 1.0);                      // R at (0,0)
    CHECK(ds.inputs[0][1] == doctest::Approx(128.0 / 255.0));  // G at (0,0)
    CHECK(ds.inputs[0][2] == 0.0);                      // B at (0,0)
    ds.validate();

    {
        std::ofstream os("short.bin", std::ios::binary);
        os.write("abc", 3);
    }
    try {
        (void)load_cifar10("short.bin");
        FAIL("expected size error");
    } catch (const IoError& e) {
        std::string msg = e.what();
        CHECK(msg.find("30730000") != std::string::npos);  // expected bytes
        CHECK(msg.find("3") != std::string::npos);         // actual bytes
    }
    std::remove("batch.bin");
    std::remove("short.bin");
}

TEST_CASE("synth_gaussians: counts, determinism, learnability, range") {
    Dataset a = synth_gaussians(2, 2, 100, 0.05, 31);
    CHECK(a.size() == 200);
    CHECK(a.num_classes == 2);
    a.validate();

    Dataset b = synth_gaussians(2, 2, 100, 0.05, 31);
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(a.inputs[i].same_as(b.inputs[i]));
        CHECK(a.labels[i] == b.labels[i]);
    }

    std::vector<std::vector<double>> xs;
    std::vector<std::size_t> ys;
    for (std::size_t i = 0; i < a.size(); ++i) {
        xs.push_back(a.inputs[i].data);
        ys.push_back(a.labels[i]);
    }
    auto oracle = jacshield::testing::LogisticOracle::fit(xs, ys, 2);
    CHECK(oracle.accuracy(xs, ys) >= 0.95);

    CHECK_THROWS_AS((void)synth_gaussians(1, 2, 10, 0.1, 1), Error);
    CHECK_THROWS_AS((void)synth_gaussians(2, 1, 10, 0.1, 1), Error);
}

TEST_CASE("subsample: stratification, identity multiset, determinism") {
    Dataset ds = synth_gaussians(3, 2, 50, 0.1, 7);  // 150 samples, 50 per class

    Dataset sub = subsample(ds, 30, 5);
    CHECK(sub.size() == 30);
    std::vector<std::size_t> counts(3, 0);
    for (std::size_t y : sub.labels) ++counts[y];
    for (std::size_t c = 0; c < 3; ++c) CHECK(std::abs(static_cast<long>(counts[c]) - 10) <= 1);

    Dataset all = subsample(ds, ds.size(), 9);
    CHECK(all.size() == ds.size());
    auto key = [](const Dataset& d) {
        std::vector<std::pair<std::size_t, std::vector<double>>> k;
        for (std::size_t i = 0; i < d.size(); ++i) k.emplace_back(d.labels[i], d.inputs[i].data);
        std::sort(k.begin(), k.end());
        return k;
    };
    CHECK(key(all) == key(ds));

    Dataset s1 = subsample(ds, 21, 4);
    Dataset s2 = subsample(ds, 21, 4);
    for (std::size_t i = 0; i < s1.size(); ++i) CHECK(s1.inputs[i].same_as(s2.inputs[i]));

    CHECK_THROWS_AS((void)subsample(ds, ds.size() + 1, 0), Error);
}

TEST_CASE("reshape_inputs") {
    Dataset ds = synth_gaussians(2, 4, 3, 0.1, 2);
    Dataset r = reshape_inputs(ds, {2, 2, 1});
    CHECK(r.inputs[0].shape == Shape{2, 2, 1});
    CHECK_THROWS_AS((void)reshape_inputs(ds, {3, 3, 1}), Error);
}
