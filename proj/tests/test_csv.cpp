#include "fuse/csv.hpp"

#include <gtest/gtest.h>

#include <cstdio>
#include <fstream>

namespace {

std::string write_temp(const std::string& name, const std::string& content) {
    const std::string path = testing::TempDir() + name;
    std::ofstream out(path);
    out << content;
    return path;
}

}  // namespace

TEST(Csv, PlainMatrix) {
    const auto path = write_temp("plain.csv", "1,2,3\n4,5,6\n");
    const fuse::Matrix m = fuse::read_csv_matrix(path);
    ASSERT_EQ(m.rows, 2u);
    ASSERT_EQ(m.cols, 3u);
    EXPECT_DOUBLE_EQ(m(1, 2), 6.0);
}

TEST(Csv, HeaderAutoDetected) {
    const auto path = write_temp("hdr.csv", "x,y\n1,2\n3,4\n");
    const fuse::Matrix m = fuse::read_csv_matrix(path);
    ASSERT_EQ(m.rows, 2u);
    EXPECT_DOUBLE_EQ(m(0, 0), 1.0);
}

TEST(Csv, CommentLinesSkipped) {
    const auto path = write_temp("cmt.csv", "# produced by a tool\n1,2\n3,4\n");
    const fuse::Matrix m = fuse::read_csv_matrix(path);
    ASSERT_EQ(m.rows, 2u);
}

TEST(Csv, RaggedRejected) {
    const auto path = write_temp("ragged.csv", "1,2\n3,4,5\n");
    EXPECT_THROW(fuse::read_csv_matrix(path), fuse::data_error);
}

TEST(Csv, NonNumericMidFileRejected) {
    const auto path = write_temp("mid.csv", "1,2\nfoo,4\n");
    EXPECT_THROW(fuse::read_csv_matrix(path), fuse::data_error);
}

TEST(Csv, NonFiniteRejected) {
    const auto path = write_temp("inf.csv", "1,2\ninf,4\n");
    EXPECT_THROW(fuse::read_csv_matrix(path), fuse::data_error);
}

TEST(Csv, MissingFile) {
    EXPECT_THROW(fuse::read_csv_matrix("/nonexistent/file.csv"), fuse::data_error);
}

TEST(Csv, RoundTripPreservesValues) {
    fuse::Matrix m(2, 2);
    m(0, 0) = 0.1;
    m(0, 1) = -1.0 / 3.0;
    m(1, 0) = 1e-17;
    m(1, 1) = 12345.678901234567;
    const auto path = testing::TempDir() + "rt.csv";
    fuse::write_csv_matrix(path, m, "cfg echo", {"a", "b"});
    const fuse::Matrix back = fuse::read_csv_matrix(path);
    ASSERT_EQ(back.rows, 2u);
    for (std::size_t i = 0; i < m.data.size(); ++i) EXPECT_EQ(back.data[i], m.data[i]);
}
