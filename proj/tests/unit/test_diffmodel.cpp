#include <gtest/gtest.h>

#include "support.hpp"
#include "tangle/corpus.hpp"
#include "tangle/diffmodel.hpp"

using namespace tangle;

namespace {

const char* kTwoFiles = "diff --git a/src/a.py b/src/a.py\n"
                        "index 1111111..2222222 100644\n"
                        "--- a/src/a.py\n"
                        "+++ b/src/a.py\n"
                        "@@ -1,3 +1,4 @@ def main():\n"
                        " x = 1\n"
                        "-y = 2\n"
                        "+y = 3\n"
                        "+z = 4\n"
                        " return x\n"
                        "@@ -10 +11 @@\n"
                        "-old\n"
                        "+new\n"
                        "diff --git a/README.md b/README.md\n"
                        "--- a/README.md\n"
                        "+++ b/README.md\n"
                        "@@ -1,2 +1,2 @@\n"
                        "-# Title\n"
                        "+# Better title\n"
                        " \n"
                        "\\ No newline at end of file\n";

} // namespace

TEST(DiffModel, HunkHeaderRanges)
{
    auto r = parse_hunk_header("@@ -3,7 +4,9 @@ fn main()");
    ASSERT_TRUE(r);
    EXPECT_EQ(r->first, (LineRange{3, 7}));
    EXPECT_EQ(r->second, (LineRange{4, 9}));
    r = parse_hunk_header("@@ -10 +11 @@");
    ASSERT_TRUE(r);
    EXPECT_EQ(r->first, (LineRange{10, 1}));
    EXPECT_EQ(r->second, (LineRange{11, 1}));
    r = parse_hunk_header("@@ -0,0 +1,2 @@");
    ASSERT_TRUE(r);
    EXPECT_EQ(r->first.count, 0u);
    EXPECT_FALSE(parse_hunk_header("@@ -a,1 +1 @@"));
    EXPECT_FALSE(parse_hunk_header("@@ -1 +1"));
    EXPECT_FALSE(parse_hunk_header("@ -1 +1 @@"));
}

TEST(DiffModel, ParsesFilesAndHunks)
{
    const auto doc = parse_unified_diff(kTwoFiles);
    ASSERT_EQ(doc.files.size(), 2u);
    EXPECT_EQ(doc.files[0].header_lines.size(), 4u);
    ASSERT_EQ(doc.files[0].hunks.size(), 2u);
    EXPECT_EQ(doc.files[0].hunks[0].body_lines.size(), 5u);
    EXPECT_EQ(doc.files[0].hunks[1].body_lines.size(), 2u);
    EXPECT_EQ(doc.files[0].path(), "src/a.py");
    EXPECT_EQ(doc.files[1].path(), "README.md");
    ASSERT_EQ(doc.files[1].hunks.size(), 1u);
    EXPECT_EQ(doc.files[1].hunks[0].body_lines.back(), "\\ No newline at end of file");
    EXPECT_TRUE(doc.trailing_newline);
}

TEST(DiffModel, RoundTripIsLossless)
{
    EXPECT_EQ(parse_unified_diff(kTwoFiles).render(), kTwoFiles);
    std::string no_newline(kTwoFiles);
    no_newline.pop_back();
    EXPECT_EQ(parse_unified_diff(no_newline).render(), no_newline);
}

TEST(DiffModel, BodyLineStartingWithDashesStaysInHunk)
{
    // "--- x" removed from a file is body while the old count is open.
    const std::string d = "--- a/f\n+++ b/f\n@@ -1,2 +1 @@\n--- x\n-y\n";
    const auto doc = parse_unified_diff(d);
    ASSERT_EQ(doc.files.size(), 1u);
    EXPECT_EQ(doc.files[0].hunks[0].body_lines, (std::vector<std::string>{"--- x", "-y"}));
    EXPECT_EQ(doc.render(), d);
}

TEST(DiffModel, FileWithoutGitHeader)
{
    const std::string d = "--- a/f\n+++ b/f\n@@ -1 +1 @@\n-a\n+b\n--- a/g\n+++ b/g\n@@ -1 +1 @@\n-c\n+d\n";
    const auto doc = parse_unified_diff(d);
    ASSERT_EQ(doc.files.size(), 2u);
    EXPECT_EQ(doc.files[1].path(), "g");
    EXPECT_EQ(doc.render(), d);
}

TEST(DiffModel, MalformedHunkHeaderThrows)
{
    EXPECT_THROW(parse_unified_diff("--- a/f\n+++ b/f\n@@ -x +1 @@\n+a\n"), MalformedHunkHeader);
}

TEST(DiffModel, BodyOutsideHunkThrows)
{
    EXPECT_THROW(parse_unified_diff("+orphan\n"), BodyOutsideHunk);
    EXPECT_THROW(parse_unified_diff(" context first\n"), BodyOutsideHunk);
}

TEST(DiffModel, EmptyInput)
{
    const auto doc = parse_unified_diff("");
    EXPECT_TRUE(doc.files.empty());
    EXPECT_EQ(doc.render(), "");
}

TEST(DiffModel, CorpusDiffsRoundTrip)
{
    const auto corpus = load_corpus(testsupport::source_path("data/sample_corpus.jsonl"));
    ASSERT_GE(corpus.records.size(), 100u);
    std::size_t checked = 0;
    for (const auto& r : corpus.records) {
        const auto doc = parse_unified_diff(r.diff_text);
        ASSERT_EQ(doc.render(), r.diff_text) << r.id;
        EXPECT_FALSE(doc.files.empty()) << r.id;
        ++checked;
    }
    EXPECT_GE(checked, 100u);
}
