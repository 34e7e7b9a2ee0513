#include "fcmdnn/error.hpp"
#include "fcmdnn/preprocess.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>

using namespace fcmdnn;

namespace {

Sample image(int w, int h, std::vector<double> pixels) {
    Sample s;
    s.width = w;
    s.height = h;
    s.pixels = std::move(pixels);
    return s;
}

Dataset of(std::vector<Sample> samples) {
    Dataset d;
    for (std::size_t i = 0; i < samples.size(); ++i) {
        samples[i].id = static_cast<int>(i);
        samples[i].class_label = static_cast<int>(i % 2);
    }
    d.samples = std::move(samples);
    return d;
}

} // namespace

TEST_SUITE("preprocess") {

TEST_CASE("constant images stay constant at any size") {
    const Sample s = image(7, 5, std::vector<double>(35, 7.0));
    for (const int side : {1, 3, 10, 16}) {
        const Sample r = resize(s, side);
        CHECK(r.width == side);
        CHECK(r.height == side);
        for (const double v : r.pixels) CHECK(v == 7.0);
    }
}

TEST_CASE("resizing to the current size is the identity") {
    std::vector<double> px(16);
    for (int i = 0; i < 16; ++i) px[static_cast<std::size_t>(i)] = i * 13 % 7;
    const Sample s = image(4, 4, px);
    CHECK(resize(s, 4).pixels == px);
}

TEST_CASE("a horizontal ramp stays a horizontal ramp") {
    std::vector<double> px;
    for (int y = 0; y < 4; ++y)
        for (int x = 0; x < 4; ++x) px.push_back(x * 10.0);
    const Sample r = resize(image(4, 4, px), 2);
    // Output centers map to source x = 0.5 and 2.5.
    CHECK(r.pixels == std::vector<double>{5.0, 25.0, 5.0, 25.0});
}

TEST_CASE("resize stays within the input range and keeps ids") {
    Sample s = image(5, 3, {0, 9, 3, 255, 4, 8, 1, 200, 7, 6, 5, 100, 2, 50, 30});
    s.id = 12;
    s.class_label = 1;
    const Sample r = resize(s, 9);
    CHECK(r.id == 12);
    CHECK(r.class_label == 1);
    for (const double v : r.pixels) {
        CHECK(v >= 0.0);
        CHECK(v <= 255.0);
    }
    CHECK(resize(resize(s, 6), 6).pixels.size() == 36);
}

TEST_CASE("zero-area input is rejected") {
    CHECK_THROWS_AS(resize(image(0, 3, {}), 4), Error);
    CHECK_THROWS_AS(resize(image(2, 2, {1, 2, 3, 4}), 0), Error);
}

TEST_CASE("scale_by_255 divides every intensity") {
    const Dataset d = of({image(3, 1, {0, 255, 51}), image(3, 1, {255, 0, 0})});
    const Dataset n = normalize(d, {3, Normalization::scale_by_255});
    CHECK(n.samples[0].pixels == std::vector<double>{0.0, 1.0, 0.2});
}

TEST_CASE("per-attribute min-max maps each position to [0,1]") {
    const Dataset d = of({image(2, 1, {2, 9}), image(2, 1, {4, 9}), image(2, 1, {6, 9})});
    const Dataset n = normalize(d, {2, Normalization::per_attribute_minmax});
    CHECK(n.samples[0].pixels == std::vector<double>{0.0, 0.0});
    CHECK(n.samples[1].pixels == std::vector<double>{0.5, 0.0});
    CHECK(n.samples[2].pixels == std::vector<double>{1.0, 0.0});
}

TEST_CASE("fitted ranges clamp unseen data into [0,1] and keep ordering") {
    const Dataset fit = of({image(1, 1, {10}), image(1, 1, {20})});
    const MinMaxStats stats = fit_minmax(fit);
    const Dataset other = of({image(1, 1, {5}), image(1, 1, {15}), image(1, 1, {25})});
    const Dataset n = apply_normalization(other, Normalization::per_attribute_minmax, &stats);
    CHECK(n.samples[0].pixels[0] == 0.0);
    CHECK(n.samples[1].pixels[0] == 0.5);
    CHECK(n.samples[2].pixels[0] == 1.0);
    CHECK_THROWS_AS(apply_normalization(other, Normalization::per_attribute_minmax, nullptr), Error);
}

TEST_CASE("mixed dimensions are a shape mismatch") {
    const Dataset d = of({image(2, 1, {1, 2}), image(1, 1, {1})});
    try {
        normalize(d, {2, Normalization::per_attribute_minmax});
        FAIL("expected an error");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::shape_mismatch);
    }
}

}
