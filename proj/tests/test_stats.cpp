int __test_stats_placeholder;
