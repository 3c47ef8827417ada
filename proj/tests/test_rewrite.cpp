int __test_rewrite_placeholder;
