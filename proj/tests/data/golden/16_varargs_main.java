class App {
    public static void main(String... args) {
        int n = args.length > 0 ? Integer.parseInt(args[0]) : 3;
        for (String a : args) {
            System.out.println(a);
        }
        System.out.println(n);
    }
}
