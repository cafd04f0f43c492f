#include "gsemtmo/imageio.hpp"

#include <algorithm>
#include <cmath>

#include <opencv2/core.hpp>
#include <opencv2/imgcodecs.hpp>

#include "gsemtmo/errors.hpp"

namespace gsemtmo {

namespace {

cv::Mat read_any(const std::filesystem::path& path) {
    cv::Mat m = cv::imread(path.string(), cv::IMREAD_UNCHANGED);
    if (m.empty()) throw ValidationError("cannot read image: " + path.string());
    return m;
}

// OpenCV loads color images as BGR; convert while normalizing.
ImageF to_imagef(const cv::Mat& m, const std::filesystem::path& path) {
    if (m.channels() != 3)
        throw ValidationError("expected 3 channels, got " + std::to_string(m.channels()) +
                              ": " + path.string());
    ImageF img(m.cols, m.rows, 3);
    if (m.depth() == CV_16U) {
        for (int y = 0; y < m.rows; ++y) {
            const cv::Vec3w* row = m.ptr<cv::Vec3w>(y);
            for (int x = 0; x < m.cols; ++x) {
                img.at(x, y, 0) = row[x][2] / 65535.0f;
                img.at(x, y, 1) = row[x][1] / 65535.0f;
                img.at(x, y, 2) = row[x][0] / 65535.0f;
            }
        }
    } else if (m.depth() == CV_8U) {
        for (int y = 0; y < m.rows; ++y) {
            const cv::Vec3b* row = m.ptr<cv::Vec3b>(y);
            for (int x = 0; x < m.cols; ++x) {
                img.at(x, y, 0) = row[x][2] / 255.0f;
                img.at(x, y, 1) = row[x][1] / 255.0f;
                img.at(x, y, 2) = row[x][0] / 255.0f;
            }
        }
    } else {
        throw ValidationError("unsupported bit depth: " + path.string());
    }
    return img;
}

float clamp01(float v) { return std::clamp(v, 0.0f, 1.0f); }

}  // namespace

ImageF load_linear_image(const std::filesystem::path& path) {
    cv::Mat m = read_any(path);
    if (m.depth() != CV_16U)
        throw ValidationError("unsupported bit depth (need 16-bit linear): " + path.string());
    return to_imagef(m, path);
}

ImageF load_display_image(const std::filesystem::path& path) {
    return to_imagef(read_any(path), path);
}

SegMap load_segmentation(const std::filesystem::path& path) {
    cv::Mat m = read_any(path);
    if (m.channels() != 1 || m.depth() != CV_8U)
        throw ValidationError("segmentation must be 8-bit single-channel: " + path.string());
    SegMap seg(m.cols, m.rows);
    for (int y = 0; y < m.rows; ++y) {
        const std::uint8_t* row = m.ptr<std::uint8_t>(y);
        for (int x = 0; x < m.cols; ++x) seg.at(x, y) = row[x];
    }
    return seg;
}

void save_png16(const std::filesystem::path& path, const ImageF& img) {
    if (img.channels != 3) throw ValidationError("save_png16: need 3 channels");
    cv::Mat m(img.height, img.width, CV_16UC3);
    for (int y = 0; y < img.height; ++y) {
        cv::Vec3w* row = m.ptr<cv::Vec3w>(y);
        for (int x = 0; x < img.width; ++x) {
            row[x][2] = static_cast<std::uint16_t>(std::lround(clamp01(img.at(x, y, 0)) * 65535.0f));
            row[x][1] = static_cast<std::uint16_t>(std::lround(clamp01(img.at(x, y, 1)) * 65535.0f));
            row[x][0] = static_cast<std::uint16_t>(std::lround(clamp01(img.at(x, y, 2)) * 65535.0f));
        }
    }
    if (!cv::imwrite(path.string(), m))
        throw std::runtime_error("save_png16: write failed: " + path.string());
}

void save_png8(const std::filesystem::path& path, const ImageF& img) {
    if (img.channels != 3) throw ValidationError("save_png8: need 3 channels");
    cv::Mat m(img.height, img.width, CV_8UC3);
    for (int y = 0; y < img.height; ++y) {
        cv::Vec3b* row = m.ptr<cv::Vec3b>(y);
        for (int x = 0; x < img.width; ++x) {
            row[x][2] = static_cast<std::uint8_t>(std::lround(clamp01(img.at(x, y, 0)) * 255.0f));
            row[x][1] = static_cast<std::uint8_t>(std::lround(clamp01(img.at(x, y, 1)) * 255.0f));
            row[x][0] = static_cast<std::uint8_t>(std::lround(clamp01(img.at(x, y, 2)) * 255.0f));
        }
    }
    if (!cv::imwrite(path.string(), m))
        throw std::runtime_error("save_png8: write failed: " + path.string());
}

void save_gray8(const std::filesystem::path& path, const SegMap& seg) {
    cv::Mat m(seg.height, seg.width, CV_8UC1);
    for (int y = 0; y < seg.height; ++y) {
        std::uint8_t* row = m.ptr<std::uint8_t>(y);
        for (int x = 0; x < seg.width; ++x) row[x] = seg.at(x, y);
    }
    if (!cv::imwrite(path.string(), m))
        throw std::runtime_error("save_gray8: write failed: " + path.string());
}

void save_plane_png(const std::filesystem::path& path, const PlaneF& plane) {
    cv::Mat m(plane.height, plane.width, CV_8UC1);
    for (int y = 0; y < plane.height; ++y) {
        std::uint8_t* row = m.ptr<std::uint8_t>(y);
        for (int x = 0; x < plane.width; ++x)
            row[x] = static_cast<std::uint8_t>(std::lround(clamp01(plane.at(x, y)) * 255.0f));
    }
    if (!cv::imwrite(path.string(), m))
        throw std::runtime_error("save_plane_png: write failed: " + path.string());
}

}  // namespace gsemtmo
